"""The sequential optimization loop: evaluate an initial design, then
repeatedly fit the strategy's surrogate stack, maximize expected improvement,
and evaluate the proposal.  Maximization convention throughout."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .acquisition import propose_next
from .composite import Strategy, fit_stack
from .errors import MonoboError, TrialError

DEFAULT_N_INIT = 4
DEFAULT_BUDGET = 8
DEFAULT_N_TRIALS = 10


class Problem:
    """A decomposable objective over the unit cube.

    Subclasses set dimension, specs (one ComponentSpec per component), name,
    and implement _evaluate(x) returning one value per component.
    """

    dimension: int
    specs: tuple
    name: str

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.dimension:
            raise ValueError(
                f"{self.name}: expected {self.dimension} coordinates, got {x.shape[0]}"
            )
        if np.any(x < 0) or np.any(x > 1):
            raise ValueError(f"{self.name}: point outside the unit cube")
        values = np.asarray(self._evaluate(x), dtype=float).ravel()
        if values.shape[0] != len(self.specs):
            raise MonoboError(
                f"{self.name}: oracle returned {values.shape[0]} values for "
                f"{len(self.specs)} components"
            )
        if not np.all(np.isfinite(values)):
            raise MonoboError(f"{self.name}: oracle returned non-finite values")
        return values


@dataclass(frozen=True)
class EvaluationRecord:
    """One probed point: coordinates, per-component values, and their sum
    (accumulated left to right so reruns are bit-identical)."""

    x: tuple
    components: tuple
    total: float

    @classmethod
    def make(cls, x, components) -> "EvaluationRecord":
        components = tuple(float(v) for v in components)
        total = 0.0
        for v in components:
            total += v
        return cls(
            x=tuple(float(v) for v in x), components=components, total=total
        )


@dataclass(frozen=True)
class TrialTrace:
    """Ordered evaluations and the running best of one optimization run."""

    records: tuple
    best_so_far: tuple
    seed: int
    strategy: Strategy
    problem_name: str

    def __post_init__(self):
        if len(self.records) != len(self.best_so_far):
            raise ValueError("best_so_far must have one entry per record")
        for prev, nxt in zip(self.best_so_far, self.best_so_far[1:]):
            if nxt < prev:
                raise ValueError("best_so_far must be non-decreasing")


def initial_design(d: int, n: int, seed: int) -> np.ndarray:
    """n independent uniform points in [0,1]^d from a seeded generator."""
    if n < 1:
        raise ValueError("need at least one design point")
    rng = np.random.default_rng(seed)
    return rng.uniform(size=(n, d))


def _propose_seed(trial_seed: int, iteration: int) -> int:
    return trial_seed * 1009 + iteration


def run_trial(
    problem: Problem,
    strategy: Strategy,
    budget: int = DEFAULT_BUDGET,
    n_init: int = DEFAULT_N_INIT,
    seed: int = 0,
    grid_resolution: int | None = None,
) -> TrialTrace:
    """One optimization run: n_init random evaluations, then budget rounds of
    fit / propose / evaluate.  Oracle failures abort with the partial trace."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    records = []
    try:
        for x in initial_design(problem.dimension, n_init, seed):
            records.append(EvaluationRecord.make(x, problem.evaluate(x)))
        for k in range(budget):
            stack = fit_stack(
                records, problem.specs, strategy, grid_resolution, seed=seed
            )
            best = max(r.total for r in records)
            x_next = propose_next(stack, best, seed=_propose_seed(seed, k))
            records.append(EvaluationRecord.make(x_next, problem.evaluate(x_next)))
    except MonoboError as exc:
        raise TrialError(
            f"trial aborted after {len(records)} evaluations: {exc}", records
        ) from exc
    best_curve = []
    best = -np.inf
    for r in records:
        best = max(best, r.total)
        best_curve.append(best)
    return TrialTrace(
        records=tuple(records),
        best_so_far=tuple(best_curve),
        seed=seed,
        strategy=strategy,
        problem_name=problem.name,
    )


def run_trials(
    problem: Problem,
    strategy: Strategy,
    budget: int = DEFAULT_BUDGET,
    n_init: int = DEFAULT_N_INIT,
    n_trials: int = DEFAULT_N_TRIALS,
    base_seed: int = 0,
    grid_resolution: int | None = None,
    jobs: int = 1,
):
    """Repeated trials with seed = base_seed + t, so strategies compared
    under the same base_seed share initial designs trial for trial.

    Returns a list holding a TrialTrace per trial, or the TrialError for
    trials whose oracle failed; errors do not abort the batch.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")

    def one(t: int):
        try:
            return run_trial(
                problem, strategy, budget, n_init, base_seed + t, grid_resolution
            )
        except TrialError as exc:
            return exc

    if jobs <= 1:
        return [one(t) for t in range(n_trials)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, range(n_trials)))
