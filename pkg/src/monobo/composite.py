"""Surrogate stacks over decomposed objectives.

Three strategies: one GP on the summed values (Standard), one unconstrained
GP per component (Decomposed), or one monotonicity-constrained GP per
component (DecomposedMonotone).  Component models are independent, so the sum
prediction adds means and variances in component index order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import FitError, MonoboError, NumericError
from .gp_core import FittedGp, PosteriorSummary, TrainingSet
from .gp_core import fit as fit_gp
from .gp_core import predict as predict_gp
from .gp_mono import FittedMonoGp, fit_mono, make_virtual_grid, predict_mono


class Strategy(enum.Enum):
    STANDARD = "standard"
    DECOMPOSED = "decomp"
    DECOMPOSED_MONOTONE = "decomp-mono"


@dataclass(frozen=True)
class ComponentSpec:
    """A component's name and its per-dimension monotonicity signs."""

    name: str
    signs: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (-1, 0, 1) for s in signs):
            raise ValueError("signs must be in {-1, 0, +1}")
        object.__setattr__(self, "signs", signs)

    @property
    def constrained(self) -> bool:
        return any(s != 0 for s in self.signs)


@dataclass(frozen=True)
class SurrogateStack:
    """Fitted models for one strategy: a single total model for Standard,
    otherwise one model per component."""

    strategy: Strategy
    models: tuple
    specs: tuple
    grid_resolution: int
    dimension: int

    def __post_init__(self):
        if self.strategy is Strategy.STANDARD:
            if len(self.models) != 1:
                raise ValueError("Standard strategy carries exactly one model")
        elif len(self.models) != len(self.specs):
            raise ValueError("need one model per component")


def default_grid_resolution(d: int) -> int:
    """Per-dimension virtual grid resolution: 10 for d<=2, 4 for d=3, 3 above
    (the last extrapolated to bound the constraint count)."""
    if d <= 2:
        return 10
    if d == 3:
        return 4
    return 3


def fit_stack(records, specs, strategy: Strategy, grid_resolution: int | None = None, seed: int = 0) -> SurrogateStack:
    """Fit the surrogate stack for a strategy on the evaluations so far."""
    records = list(records)
    if len(records) == 0:
        raise ValueError("need at least one evaluation record")
    specs = tuple(specs)
    X = np.asarray([r.x for r in records], dtype=float)
    d = X.shape[1]
    for spec in specs:
        if len(spec.signs) != d:
            raise ValueError(
                f"component {spec.name}: {len(spec.signs)} signs for dimension {d}"
            )
    comp_values = np.asarray([r.components for r in records], dtype=float)
    if comp_values.shape[1] != len(specs):
        raise ValueError(
            f"records carry {comp_values.shape[1]} components, specs describe {len(specs)}"
        )
    resolution = default_grid_resolution(d) if grid_resolution is None else int(grid_resolution)

    if strategy is Strategy.STANDARD:
        totals = np.asarray([r.total for r in records], dtype=float)
        models = (fit_gp(TrainingSet(X, totals), seed=seed),)
        return SurrogateStack(strategy, models, specs, resolution, d)

    models = []
    for i, spec in enumerate(specs):
        training = TrainingSet(X, comp_values[:, i])
        try:
            if strategy is Strategy.DECOMPOSED_MONOTONE and spec.constrained:
                grid = make_virtual_grid(d, resolution, spec.signs)
                models.append(fit_mono(training, grid, seed=seed))
            else:
                models.append(fit_gp(training, seed=seed))
        except (FitError, NumericError) as exc:
            raise FitError(f"component {spec.name}: {exc}") from exc
    return SurrogateStack(strategy, tuple(models), specs, resolution, d)


def _predict_one(model, Xq) -> PosteriorSummary:
    if isinstance(model, FittedMonoGp):
        return predict_mono(model, Xq)
    if isinstance(model, FittedGp):
        return predict_gp(model, Xq)
    raise MonoboError(f"unknown model type {type(model).__name__}")


def predict_sum(stack: SurrogateStack, Xq) -> PosteriorSummary:
    """Summed predictive mean and variance across the stack's models."""
    parts = [_predict_one(model, Xq) for model in stack.models]
    mean = parts[0].mean.copy()
    variance = parts[0].variance.copy()
    for part in parts[1:]:
        mean += part.mean
        variance += part.variance
    return PosteriorSummary(mean=mean, variance=variance)
