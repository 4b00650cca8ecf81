"""Isotropic squared-exponential covariance and its derivative cross-covariances.

The covariance between function values is

    k(x, x') = signal_variance * exp(-||x - x'||^2 / (2 * length_scale^2)),

and because differentiation is a linear operator, covariances involving
derivative values follow by differentiating k.  All inputs are assumed to be
pre-normalized to the unit cube by the problem layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, LinAlgError

from .errors import NumericError

# Relative diagonal jitter for factorizations; doubled on failure.
JITTER_FACTOR = 1e-8
MAX_JITTER_DOUBLINGS = 6


@dataclass(frozen=True)
class GpHyperparameters:
    """The three parameters of one GP: signal variance, isotropic length
    scale, and independent noise variance."""

    signal_variance: float
    length_scale: float
    noise_variance: float

    def __post_init__(self):
        for name in ("signal_variance", "length_scale", "noise_variance"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if self.length_scale <= 0:
            raise ValueError("length_scale must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")


@dataclass(frozen=True)
class DerivativeIndex:
    """One virtual derivative observation site: a point in the unit cube, the
    coordinate being differentiated, and the required derivative sign."""

    point: tuple
    dim: int
    sign: int

    def __post_init__(self):
        point = np.asarray(self.point, dtype=float)
        object.__setattr__(self, "point", tuple(point.tolist()))
        if point.ndim != 1:
            raise ValueError("point must be a single coordinate vector")
        if np.any(point < 0) or np.any(point > 1):
            raise ValueError("point must lie inside the unit cube")
        if not 0 <= self.dim < point.size:
            raise ValueError(f"dim {self.dim} out of range for d={point.size}")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError("expected a point or an (n, d) array of points")
    if not np.all(np.isfinite(X)):
        raise ValueError("points must be finite")
    return X


def _check_same_dim(x: np.ndarray, x2: np.ndarray):
    if x.shape[-1] != x2.shape[-1]:
        raise ValueError(
            f"dimension mismatch: {x.shape[-1]} vs {x2.shape[-1]}"
        )


def se_cov(x, x2, hyper: GpHyperparameters) -> float:
    """Covariance k(x, x') between two function values."""
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    _check_same_dim(x, x2)
    sq = float(np.sum((x - x2) ** 2))
    return hyper.signal_variance * np.exp(-0.5 * sq / hyper.length_scale**2)


def se_cov_dx2(x, x2, j: int, hyper: GpHyperparameters) -> float:
    """Cross-covariance cov(f(x), df(x')/dx'_j)."""
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    _check_same_dim(x, x2)
    if not 0 <= j < x.size:
        raise ValueError(f"dim {j} out of range for d={x.size}")
    return se_cov(x, x2, hyper) * (x[j] - x2[j]) / hyper.length_scale**2


def se_cov_dx_dx2(x, i: int, x2, j: int, hyper: GpHyperparameters) -> float:
    """Covariance cov(df(x)/dx_i, df(x')/dx'_j) between two derivative values."""
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    _check_same_dim(x, x2)
    for dim in (i, j):
        if not 0 <= dim < x.size:
            raise ValueError(f"dim {dim} out of range for d={x.size}")
    ell2 = hyper.length_scale**2
    delta = 1.0 if i == j else 0.0
    return (
        se_cov(x, x2, hyper)
        / ell2
        * (delta - (x[i] - x2[i]) * (x[j] - x2[j]) / ell2)
    )


def se_gram(X, X2, hyper: GpHyperparameters) -> np.ndarray:
    """Gram matrix of se_cov over two point sets, shape (n, n2)."""
    X = _as_points(X)
    X2 = _as_points(X2)
    _check_same_dim(X, X2)
    diff = X[:, None, :] - X2[None, :, :]
    sq = np.sum(diff * diff, axis=2)
    return hyper.signal_variance * np.exp(-0.5 * sq / hyper.length_scale**2)


def cross_gram_value_deriv(X, V_points, V_dims, hyper: GpHyperparameters) -> np.ndarray:
    """Cross Gram cov(f(X_a), df(V_b)/dx_{j_b}), shape (n, m)."""
    X = _as_points(X)
    V = _as_points(V_points)
    dims = np.asarray(V_dims, dtype=int)
    K = se_gram(X, V, hyper)
    coord_diff = X[:, None, :] - V[None, :, :]
    picked = coord_diff[:, np.arange(len(dims)), dims]
    return K * picked / hyper.length_scale**2


def deriv_gram(V_points, V_dims, hyper: GpHyperparameters) -> np.ndarray:
    """Gram matrix between derivative values, shape (m, m)."""
    V = _as_points(V_points)
    dims = np.asarray(V_dims, dtype=int)
    ell2 = hyper.length_scale**2
    K = se_gram(V, V, hyper)
    diff = V[:, None, :] - V[None, :, :]
    m = len(dims)
    d_i = diff[np.arange(m)[:, None], np.arange(m)[None, :], dims[:, None]]
    d_j = diff[np.arange(m)[:, None], np.arange(m)[None, :], dims[None, :]]
    delta = (dims[:, None] == dims[None, :]).astype(float)
    return K / ell2 * (delta - d_i * d_j / ell2)


def build_joint_covariance(X, V, hyper: GpHyperparameters) -> np.ndarray:
    """Joint prior covariance over [f(X); derivative values at V].

    Parameters
    ----------
    X : array (n, d)
        Function-value locations; must be nonempty.
    V : sequence of DerivativeIndex
        Derivative sites, possibly empty.
    hyper : GpHyperparameters

    Returns
    -------
    array (n + m, n + m), symmetric; PSD up to the jitter policy.
    """
    X = _as_points(X)
    if X.shape[0] == 0:
        raise ValueError("X must contain at least one point")
    K_ff = se_gram(X, X, hyper)
    if len(V) == 0:
        joint = K_ff
    else:
        V_points = np.asarray([v.point for v in V], dtype=float)
        _check_same_dim(X, V_points)
        V_dims = np.asarray([v.dim for v in V], dtype=int)
        K_fz = cross_gram_value_deriv(X, V_points, V_dims, hyper)
        K_zz = deriv_gram(V_points, V_dims, hyper)
        joint = np.block([[K_ff, K_fz], [K_fz.T, K_zz]])
    if not np.all(np.isfinite(joint)):
        raise NumericError("joint covariance contains non-finite entries")
    return joint


def cholesky_with_jitter(matrix: np.ndarray, signal_variance: float):
    """Lower Cholesky factor of a symmetric PSD matrix, adding diagonal jitter
    1e-8 * signal_variance and doubling it on failure (at most 6 times).

    Returns (L, jitter_used).  Raises NumericError when every attempt fails.
    """
    jitter = JITTER_FACTOR * signal_variance
    n = matrix.shape[0]
    eye = np.eye(n)
    for _ in range(MAX_JITTER_DOUBLINGS + 1):
        try:
            L = cholesky(matrix + jitter * eye, lower=True, check_finite=False)
            return L, jitter
        except LinAlgError:
            jitter *= 2.0
    raise NumericError(
        f"Cholesky failed after jitter escalation to {jitter / 2.0:g}"
    )
