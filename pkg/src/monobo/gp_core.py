"""Unconstrained GP regression: exact marginal likelihood, bounded maximum
likelihood fitting, and posterior prediction.

Outputs are centered (and, during fitting only, scaled to unit standard
deviation); fitted hyperparameters are reported in the original units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import FitError, NumericError
from .kernel import GpHyperparameters, cholesky_with_jitter, se_gram

# Search boxes in log10 space: signal variance, length scale, noise variance.
LOG10_BOUNDS = np.array([[-4.0, 2.0], [-1.3, 1.0], [-8.0, 0.0]])
BOX_CENTER = LOG10_BOUNDS.mean(axis=1)
N_STARTS = 10
NM_MAX_ITER = 200
NM_XATOL = 1e-6


@dataclass(frozen=True)
class TrainingSet:
    """Observed inputs in the unit cube and their (uncentered) outputs."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError("X must be an (n, d) array")
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"got {X.shape[0]} inputs but {y.shape[0]} outputs"
            )
        if X.shape[0] < 1:
            raise ValueError("need at least one observation")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("observations must be finite")
        if np.any(X < 0) or np.any(X > 1):
            raise ValueError("inputs must lie inside the unit cube")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def mean_offset(self) -> float:
        return float(np.mean(self.y))

    @property
    def y_centered(self) -> np.ndarray:
        return self.y - self.mean_offset


@dataclass(frozen=True)
class PosteriorSummary:
    """Predictive mean and variance at query points."""

    mean: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class FittedGp:
    """A GP conditioned on a training set under fixed hyperparameters.

    Caches the lower Cholesky factor of K + noise_variance*I (plus the jitter
    actually used) and the corresponding solve against the centered outputs.
    """

    training: TrainingSet
    hyper: GpHyperparameters
    mean_offset: float
    chol: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    jitter: float


def _noisy_gram(training: TrainingSet, hyper: GpHyperparameters) -> np.ndarray:
    K = se_gram(training.X, training.X, hyper)
    K[np.diag_indices_from(K)] += hyper.noise_variance
    return K


def log_marginal_likelihood(training: TrainingSet, hyper: GpHyperparameters) -> float:
    """Exact Gaussian log evidence of the centered outputs."""
    K = _noisy_gram(training, hyper)
    L, _ = cholesky_with_jitter(K, hyper.signal_variance)
    y_c = training.y_centered
    alpha = solve_triangular(
        L.T, solve_triangular(L, y_c, lower=True, check_finite=False),
        lower=False, check_finite=False,
    )
    lml = (
        -0.5 * float(y_c @ alpha)
        - float(np.sum(np.log(np.diag(L))))
        - 0.5 * training.n * np.log(2.0 * np.pi)
    )
    if not np.isfinite(lml):
        raise NumericError("log marginal likelihood is not finite")
    return lml


def make_fitted(training: TrainingSet, hyper: GpHyperparameters) -> FittedGp:
    """Condition on the training set under the given hyperparameters."""
    K = _noisy_gram(training, hyper)
    L, jitter = cholesky_with_jitter(K, hyper.signal_variance)
    y_c = training.y_centered
    alpha = solve_triangular(
        L.T, solve_triangular(L, y_c, lower=True, check_finite=False),
        lower=False, check_finite=False,
    )
    return FittedGp(
        training=training,
        hyper=hyper,
        mean_offset=training.mean_offset,
        chol=L,
        alpha=alpha,
        jitter=jitter,
    )


class _BestTracker:
    """Record every objective evaluation; the fit contract is that the result
    maximizes the objective over all candidates actually evaluated."""

    def __init__(self, objective, bounds):
        self.objective = objective
        self.bounds = bounds
        self.best_value = -np.inf
        self.best_theta = None

    def __call__(self, theta: np.ndarray) -> float:
        clipped = np.clip(theta, self.bounds[:, 0], self.bounds[:, 1])
        try:
            value = self.objective(clipped)
        except NumericError:
            return 1e12
        # quadratic penalty pushes the simplex back into the box
        penalty = float(np.sum((theta - clipped) ** 2))
        if value > self.best_value:
            self.best_value = value
            self.best_theta = clipped.copy()
        return -value + 1e3 * penalty


def _multi_start_maximize(objective, bounds: np.ndarray, seed: int):
    """Simplex search from the box center plus seeded quasi-random starts."""
    sampler = qmc.Sobol(d=len(bounds), scramble=True, seed=seed)
    unit = sampler.random_base2(4)[: N_STARTS - 1]
    starts = [bounds.mean(axis=1)]
    starts.extend(bounds[:, 0] + unit * (bounds[:, 1] - bounds[:, 0]))
    tracker = _BestTracker(objective, bounds)
    for start in starts:
        minimize(
            tracker,
            np.asarray(start, dtype=float),
            method="Nelder-Mead",
            options={
                "maxiter": NM_MAX_ITER,
                "xatol": NM_XATOL,
                "fatol": np.inf,
                "adaptive": False,
            },
        )
    if tracker.best_theta is None:
        raise FitError("every optimizer start failed numerically")
    return tracker.best_theta, tracker.best_value


def _theta_to_hyper(theta: np.ndarray) -> GpHyperparameters:
    if len(theta) == 2:
        # degenerate single-observation case: length scale pinned at box center
        sv, nv = 10.0 ** theta
        ls = 10.0 ** BOX_CENTER[1]
    else:
        sv, ls, nv = 10.0 ** theta
    return GpHyperparameters(
        signal_variance=float(sv), length_scale=float(ls), noise_variance=float(nv)
    )


def fit(training: TrainingSet, seed: int = 0) -> FittedGp:
    """Bounded maximum-likelihood hyperparameters via multi-start simplex
    search in log10 space, on outputs standardized to mean 0 and unit scale.

    Deterministic given the seed.  The returned hyperparameters are expressed
    in the original output units.
    """
    scale = float(np.std(training.y))
    if scale == 0.0:
        scale = 1.0
    std_training = TrainingSet(training.X, training.y_centered / scale)

    def objective(theta):
        return log_marginal_likelihood(std_training, _theta_to_hyper(theta))

    if training.n == 1:
        bounds = LOG10_BOUNDS[[0, 2]]
    else:
        bounds = LOG10_BOUNDS
    best_theta, _ = _multi_start_maximize(objective, bounds, seed)
    std_hyper = _theta_to_hyper(best_theta)
    hyper = GpHyperparameters(
        signal_variance=std_hyper.signal_variance * scale**2,
        length_scale=std_hyper.length_scale,
        noise_variance=std_hyper.noise_variance * scale**2,
    )
    return make_fitted(training, hyper)


def predict(model: FittedGp, Xq) -> PosteriorSummary:
    """Posterior mean and variance at query points inside the unit cube."""
    Xq = np.asarray(Xq, dtype=float)
    if Xq.ndim == 1:
        Xq = Xq[:, None] if model.training.d == 1 else Xq[None, :]
    if Xq.shape[0] == 0:
        raise ValueError("need at least one query point")
    if Xq.shape[1] != model.training.d:
        raise ValueError(
            f"query dimension {Xq.shape[1]} != training dimension {model.training.d}"
        )
    if np.any(Xq < 0) or np.any(Xq > 1):
        raise ValueError("query points must lie inside the unit cube")
    K_star = se_gram(Xq, model.training.X, model.hyper)
    mean = K_star @ model.alpha + model.mean_offset
    v = solve_triangular(model.chol, K_star.T, lower=True, check_finite=False)
    variance = model.hyper.signal_variance - np.sum(v * v, axis=0)
    return PosteriorSummary(mean=mean, variance=np.maximum(variance, 0.0))
