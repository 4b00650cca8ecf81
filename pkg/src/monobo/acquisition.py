"""Expected improvement (maximization convention) and its optimization over
the unit cube by a seeded candidate sweep plus coordinate-wise refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

CANDIDATES_PER_DIM = 1000
REFINE_FROM_TOP = 5
REFINE_STEP_START = 0.05
REFINE_STEP_MIN = 1e-4
REFINE_SWEEP_CAP = 10


@dataclass(frozen=True)
class Candidate:
    """A location and its acquisition value."""

    x: tuple
    ei: float

    def __post_init__(self):
        if self.ei < 0:
            raise ValueError("expected improvement must be non-negative")


def expected_improvement(mean, variance, best):
    """Closed-form E[max(Y - best, 0)] for Y ~ Normal(mean, variance).

    Accepts scalars or arrays; scalar inputs return a float.
    """
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0):
        raise ValueError("variance must be non-negative")
    s = np.sqrt(variance)
    delta = mean - best
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(s > 0, delta / np.where(s > 0, s, 1.0), 0.0)
    phi = np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)
    ei = np.where(s > 0, delta * ndtr(u) + s * phi, np.maximum(delta, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def _ei_at(predict, X, best):
    post = predict(np.atleast_2d(X))
    return np.atleast_1d(expected_improvement(post.mean, post.variance, best))


def maximize_ei(predict, d: int, best: float, seed: int):
    """Maximize EI of a predictive model over [0,1]^d.

    predict maps an (m, d) query array to a PosteriorSummary.  The search
    evaluates 1000*d seeded quasi-random candidates, then refines the top 5 by
    greedy coordinate steps with halving step sizes (0.05 down to 1e-4),
    accepting only strict improvements.  Ties go to the lowest candidate index.
    """
    n = CANDIDATES_PER_DIM * d
    sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
    X = sampler.random_base2(int(np.ceil(np.log2(n))))[:n]
    ei = _ei_at(predict, X, best).astype(float)

    order = np.lexsort((np.arange(n), -ei))
    best_x = X[order[0]].copy()
    best_ei = float(ei[order[0]])
    best_index = int(order[0])

    for cand_index in order[:REFINE_FROM_TOP]:
        x = X[cand_index].copy()
        value = float(ei[cand_index])
        step = REFINE_STEP_START
        while step >= REFINE_STEP_MIN:
            for _ in range(REFINE_SWEEP_CAP):
                improved = False
                for j in range(d):
                    for direction in (1.0, -1.0):
                        trial = x.copy()
                        trial[j] = min(1.0, max(0.0, trial[j] + direction * step))
                        if trial[j] == x[j]:
                            continue
                        trial_ei = float(_ei_at(predict, trial, best)[0])
                        if trial_ei > value:
                            x, value, improved = trial, trial_ei, True
                if not improved:
                    break
            step *= 0.5
        if value > best_ei or (value == best_ei and int(cand_index) < best_index):
            best_x, best_ei, best_index = x, value, int(cand_index)

    return Candidate(x=tuple(best_x.tolist()), ei=best_ei)


def propose_next(stack, best: float, seed: int) -> tuple:
    """Next evaluation point for a fitted surrogate stack: the EI argmax."""
    from .composite import predict_sum

    cand = maximize_ei(lambda X: predict_sum(stack, X), stack.dimension, best, seed)
    return cand.x
