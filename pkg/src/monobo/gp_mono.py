"""Monotonicity-constrained GP regression.

Monotonicity in dimension j is encoded by virtual derivative observations: at
each grid point the derivative latent z gets a probit factor Phi(s*z/nu) that
pushes it toward the required sign.  The Gaussian likelihood on function
values is handled exactly; the probit factors are approximated by expectation
propagation with damped sequential site updates in a fixed order.

With an empty constraint list every operation reduces to the unconstrained
model in gp_core.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.special import log_ndtr
from scipy.stats import qmc

from .errors import FitError, NumericError
from .gp_core import (
    LOG10_BOUNDS,
    PosteriorSummary,
    TrainingSet,
    _BestTracker,
    fit as fit_unconstrained,
)
from .kernel import (
    DerivativeIndex,
    GpHyperparameters,
    build_joint_covariance,
    cholesky_with_jitter,
    cross_gram_value_deriv,
    se_gram,
)

DEFAULT_NU = 0.1
EP_DAMPING = 0.8
EP_TOL = 1e-6
EP_MAX_SWEEPS = 100
# below this precision a site is treated as inactive (uninformative)
SITE_ACTIVE_TOL = 1e-11

MONO_NM_MAX_ITER = 40
MONO_NM_XATOL = 1e-2
MONO_PROBE_COUNT = 8
MONO_NM_STARTS = 1

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class VirtualGrid:
    """Virtual derivative-observation sites and the probit slack nu."""

    points: tuple
    constraints: tuple
    nu: float

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        point_set = set(self.points)
        for con in self.constraints:
            if con.point not in point_set:
                raise ValueError("constraint references a point not on the grid")


@dataclass(frozen=True)
class EpState:
    """Site approximation after EP: one Gaussian site per constraint."""

    site_precisions: np.ndarray
    site_means: np.ndarray
    converged: bool
    sweeps_used: int
    skipped_site_updates: int = 0

    def __post_init__(self):
        tau = np.asarray(self.site_precisions, dtype=float)
        mean = np.asarray(self.site_means, dtype=float)
        if np.any(tau < 0) or not np.all(np.isfinite(tau)):
            raise ValueError("site precisions must be finite and non-negative")
        if not np.all(np.isfinite(mean)):
            raise ValueError("site means must be finite")
        tau.flags.writeable = False
        mean.flags.writeable = False
        object.__setattr__(self, "site_precisions", tau)
        object.__setattr__(self, "site_means", mean)


@dataclass(frozen=True)
class LatentPosterior:
    """Gaussian posterior over the joint latents [f(X); derivative values],
    ordered as in build_joint_covariance; function-value means include the
    training mean offset."""

    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True)
class FittedMonoGp:
    """A constrained GP conditioned on data and EP sites at fixed hyper."""

    training: TrainingSet
    grid: VirtualGrid
    hyper: GpHyperparameters
    state: EpState
    log_evidence: float
    mean_offset: float
    latent: LatentPosterior = field(repr=False)
    obs_chol: np.ndarray = field(repr=False)
    obs_pseudo: np.ndarray = field(repr=False)
    obs_alpha: np.ndarray = field(repr=False)
    active_points: np.ndarray = field(repr=False)
    active_dims: np.ndarray = field(repr=False)


def make_virtual_grid(d: int, per_dim_count: int, signs, nu: float = DEFAULT_NU) -> VirtualGrid:
    """Cartesian grid of equally spaced points including both endpoints, with
    one derivative constraint per point per nonzero-sign dimension."""
    signs = tuple(int(s) for s in signs)
    if len(signs) != d:
        raise ValueError(f"need {d} signs, got {len(signs)}")
    if any(s not in (-1, 0, 1) for s in signs):
        raise ValueError("signs must be in {-1, 0, +1}")
    if all(s == 0 for s in signs):
        raise ValueError("at least one dimension must carry a constraint")
    if per_dim_count < 2:
        raise ValueError("per_dim_count must be at least 2")
    axis = np.linspace(0.0, 1.0, per_dim_count)
    points = tuple(itertools.product(*([tuple(axis.tolist())] * d)))
    constraints = tuple(
        DerivativeIndex(point=p, dim=j, sign=signs[j])
        for p in points
        for j in range(d)
        if signs[j] != 0
    )
    return VirtualGrid(points=points, constraints=constraints, nu=float(nu))


@njit(cache=True)
def _log_ndtr(x):
    # stable log of the standard normal CDF; asymptotic branch for deep tails
    if x > -34.0:
        return math.log(0.5 * math.erfc(-x / math.sqrt(2.0)))
    xx = x * x
    corr = 1.0 - 1.0 / xx + 3.0 / xx**2 - 15.0 / xx**3
    return -0.5 * xx - 0.5 * math.log(2.0 * math.pi) - math.log(-x) + math.log(corr)


@njit(cache=True)
def _ep_sweep(Sigma, mu, tau, nu_site, c, damping):
    """One damped EP pass over all sites in index order, updating the z-space
    posterior (Sigma, mu) by rank-one corrections in place.

    Returns (max parameter change, sites skipped this sweep).
    """
    m = tau.shape[0]
    max_change = 0.0
    skipped = 0
    for j in range(m):
        sjj = Sigma[j, j]
        if sjj <= 0.0:
            skipped += 1
            continue
        tau_cav = 1.0 / sjj - tau[j]
        if tau_cav <= 1e-12:
            skipped += 1
            continue
        nu_cav = mu[j] / sjj - nu_site[j]
        v_cav = 1.0 / tau_cav
        m_cav = nu_cav * v_cav
        cj = c[j]
        denom = math.sqrt(1.0 + cj * cj * v_cav)
        u0 = cj * m_cav / denom
        log_phi = -0.5 * u0 * u0 - 0.5 * _LOG_2PI
        beta = math.exp(log_phi - _log_ndtr(u0))
        alpha = beta * cj / denom
        m_hat = m_cav + v_cav * alpha
        v_hat = v_cav - v_cav * v_cav * cj * cj * (u0 * beta + beta * beta) / (
            1.0 + cj * cj * v_cav
        )
        if v_hat <= 0.0:
            skipped += 1
            continue
        tau_target = 1.0 / v_hat - tau_cav
        nu_target = m_hat / v_hat - nu_cav
        tau_new = (1.0 - damping) * tau[j] + damping * tau_target
        nu_new = (1.0 - damping) * nu_site[j] + damping * nu_target
        if tau_new < 0.0:
            tau_new = 0.0
            nu_new = 0.0
        d_tau = tau_new - tau[j]
        d_nu = nu_new - nu_site[j]
        den = 1.0 + d_tau * sjj
        if den <= 1e-12:
            skipped += 1
            continue
        col = Sigma[:, j].copy()
        coef = d_tau / den
        scale = (d_nu - d_tau * mu[j]) / den
        for a in range(m):
            mu[a] += col[a] * scale
        for a in range(m):
            ca = coef * col[a]
            for b in range(m):
                Sigma[a, b] -= ca * col[b]
        tau[j] = tau_new
        nu_site[j] = nu_new
        change = abs(d_tau)
        if abs(d_nu) > change:
            change = abs(d_nu)
        if change > max_change:
            max_change = change
    return max_change, skipped


def _recompute_z_posterior(Sigma0, m0, tau, nu_site):
    """Exact z-space posterior from the prior and current sites, via the
    Woodbury identity so Sigma0 is never inverted directly."""
    s = np.sqrt(tau)
    B = np.eye(len(tau)) + (s[:, None] * Sigma0) * s[None, :]
    LB = cholesky(B, lower=True, check_finite=False)
    SS = s[:, None] * Sigma0  # rows scaled: (S Sigma0)
    half = solve_triangular(LB, SS, lower=True, check_finite=False)
    Sigma = Sigma0 - half.T @ half
    t = m0 + Sigma0 @ nu_site
    ht = solve_triangular(LB, s * t, lower=True, check_finite=False)
    hb = solve_triangular(LB.T, ht, lower=False, check_finite=False)
    mu = t - SS.T @ hb
    return Sigma, mu


def _run_ep(Sigma0, m0, c):
    m = len(m0)
    tau = np.zeros(m)
    nu_site = np.zeros(m)
    Sigma = Sigma0.copy()
    mu = m0.copy()
    converged = False
    sweeps = 0
    skipped_total = 0
    while sweeps < EP_MAX_SWEEPS:
        max_change, skipped = _ep_sweep(Sigma, mu, tau, nu_site, c, EP_DAMPING)
        sweeps += 1
        skipped_total += skipped
        Sigma, mu = _recompute_z_posterior(Sigma0, m0, tau, nu_site)
        if max_change < EP_TOL:
            converged = True
            break
    if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(nu_site))):
        raise NumericError("EP site parameters diverged")
    return tau, nu_site, Sigma, mu, converged, sweeps, skipped_total


def _evidence(C_chol, r, tau, nu_site, c, Sigma, mu):
    """EP approximation of the log evidence.

    Gaussian pseudo-data part plus per-site corrections; cavities are
    recomputed from the final posterior.
    """
    alpha = solve_triangular(
        C_chol.T,
        solve_triangular(C_chol, r, lower=True, check_finite=False),
        lower=False,
        check_finite=False,
    )
    log_gauss = (
        -0.5 * float(r @ alpha)
        - float(np.sum(np.log(np.diag(C_chol))))
        - 0.5 * len(r) * _LOG_2PI
    )
    total = log_gauss
    m = len(tau)
    for i in range(m):
        sii = Sigma[i, i]
        tau_cav = max(1.0 / sii - tau[i], 1e-12)
        v_cav = 1.0 / tau_cav
        m_cav = (mu[i] / sii - nu_site[i]) * v_cav
        u0 = c[i] * m_cav / math.sqrt(1.0 + c[i] ** 2 * v_cav)
        log_phi_u0 = float(log_ndtr(u0))
        if tau[i] > SITE_ACTIVE_TOL:
            a = tau[i] + 1.0 / v_cav
            b = nu_site[i] + m_cav / v_cav
            total += 0.5 * math.log(2.0 * math.pi / tau[i]) + nu_site[i] ** 2 / (
                2.0 * tau[i]
            )
            total += (
                log_phi_u0
                + 0.5 * math.log1p(tau[i] * v_cav)
                + m_cav**2 / (2.0 * v_cav)
                - b**2 / (2.0 * a)
            )
        else:
            total += log_phi_u0
    if not np.isfinite(total):
        raise NumericError("EP evidence is not finite")
    return float(total)


def _infer(training: TrainingSet, grid: VirtualGrid, hyper: GpHyperparameters):
    """Full EP inference; returns every artifact the public operations need."""
    n = training.n
    constraints = grid.constraints
    m = len(constraints)
    y_c = training.y_centered

    K_big = build_joint_covariance(training.X, list(constraints), hyper)
    A_big = K_big.copy()
    A_big[np.diag_indices(n)] += hyper.noise_variance
    L_full, jitter = cholesky_with_jitter(A_big, hyper.signal_variance)

    if m == 0:
        tau = np.zeros(0)
        nu_site = np.zeros(0)
        Sigma = np.zeros((0, 0))
        mu = np.zeros(0)
        converged, sweeps, skipped = True, 0, 0
        c = np.zeros(0)
    else:
        # z-prior conditioned on the Gaussian part, read off the full factor
        L11 = L_full[:n, :n]
        L21 = L_full[n:, :n]
        L22 = L_full[n:, n:]
        t = solve_triangular(L11, y_c, lower=True, check_finite=False)
        m0 = L21 @ t
        Sigma0 = L22 @ L22.T
        c = np.array([con.sign / grid.nu for con in constraints])
        tau, nu_site, Sigma, mu, converged, sweeps, skipped = _run_ep(Sigma0, m0, c)

    state = EpState(
        site_precisions=tau,
        site_means=np.where(tau > 0, nu_site / np.where(tau > 0, tau, 1.0), 0.0),
        converged=converged,
        sweeps_used=sweeps,
        skipped_site_updates=skipped,
    )

    active = np.flatnonzero(tau > SITE_ACTIVE_TOL)
    obs_idx = np.concatenate([np.arange(n), n + active]).astype(int)
    C = K_big[np.ix_(obs_idx, obs_idx)].copy()
    noise_diag = np.concatenate(
        [np.full(n, hyper.noise_variance), 1.0 / tau[active]]
    )
    C[np.diag_indices_from(C)] += noise_diag
    C_chol, _ = cholesky_with_jitter(C, hyper.signal_variance)
    r = np.concatenate([y_c, nu_site[active] / tau[active]])
    alpha = solve_triangular(
        C_chol.T,
        solve_triangular(C_chol, r, lower=True, check_finite=False),
        lower=False,
        check_finite=False,
    )

    G = K_big[:, obs_idx]
    half = solve_triangular(C_chol, G.T, lower=True, check_finite=False)
    latent_cov = K_big - half.T @ half
    latent_mean = G @ alpha
    latent_mean[:n] += training.mean_offset
    latent = LatentPosterior(mean=latent_mean, cov=latent_cov)

    log_z = _evidence(C_chol, r, tau, nu_site, c, Sigma, mu)

    if m == 0:
        active_points = np.zeros((0, training.d))
        active_dims = np.zeros(0, dtype=int)
    else:
        pts = np.asarray([constraints[i].point for i in active], dtype=float)
        active_points = pts.reshape(len(active), training.d)
        active_dims = np.asarray([constraints[i].dim for i in active], dtype=int)

    return {
        "state": state,
        "latent": latent,
        "log_evidence": log_z,
        "obs_chol": C_chol,
        "obs_pseudo": r,
        "obs_alpha": alpha,
        "active_points": active_points,
        "active_dims": active_dims,
    }


def ep_posterior(training: TrainingSet, grid: VirtualGrid, hyper: GpHyperparameters):
    """EP site state and the Gaussian posterior over joint latents."""
    parts = _infer(training, grid, hyper)
    return parts["state"], parts["latent"]


def ep_log_marginal(training: TrainingSet, grid: VirtualGrid, hyper: GpHyperparameters) -> float:
    """EP approximation of the log marginal likelihood (the fit objective)."""
    return _infer(training, grid, hyper)["log_evidence"]


def make_fitted_mono(training: TrainingSet, grid: VirtualGrid, hyper: GpHyperparameters) -> FittedMonoGp:
    """Condition the constrained model at fixed hyperparameters."""
    parts = _infer(training, grid, hyper)
    return FittedMonoGp(
        training=training,
        grid=grid,
        hyper=hyper,
        state=parts["state"],
        log_evidence=parts["log_evidence"],
        mean_offset=training.mean_offset,
        latent=parts["latent"],
        obs_chol=parts["obs_chol"],
        obs_pseudo=parts["obs_pseudo"],
        obs_alpha=parts["obs_alpha"],
        active_points=parts["active_points"],
        active_dims=parts["active_dims"],
    )


def fit_mono(training: TrainingSet, grid: VirtualGrid, seed: int = 0) -> FittedMonoGp:
    """Hyperparameters maximizing the EP evidence, then the fitted model.

    Same multi-start shape as the unconstrained fit, scaled down because EP
    is far costlier per evaluation: the box center, the clipped unconstrained
    optimum, and a seeded quasi-random probe set are all scored, and a short
    simplex run refines the best of them.  The box center is always
    evaluated, so the result can never score below the default
    hyperparameters.
    """
    unconstrained = fit_unconstrained(training, seed=seed)

    def objective(theta):
        sv, ls, nv = 10.0**theta
        hyper = GpHyperparameters(float(sv), float(ls), float(nv))
        return ep_log_marginal(training, grid, hyper)

    warm = np.clip(
        np.log10(
            [
                unconstrained.hyper.signal_variance,
                unconstrained.hyper.length_scale,
                unconstrained.hyper.noise_variance,
            ]
        ),
        LOG10_BOUNDS[:, 0],
        LOG10_BOUNDS[:, 1],
    )
    sampler = qmc.Sobol(d=len(LOG10_BOUNDS), scramble=True, seed=seed)
    unit = sampler.random_base2(3)[:MONO_PROBE_COUNT]
    probes = LOG10_BOUNDS[:, 0] + unit * (LOG10_BOUNDS[:, 1] - LOG10_BOUNDS[:, 0])
    candidates = [LOG10_BOUNDS.mean(axis=1), warm] + list(probes)

    tracker = _BestTracker(objective, LOG10_BOUNDS)
    scored = []
    for theta in candidates:
        value = tracker(np.asarray(theta, dtype=float))
        if np.isfinite(value):
            scored.append((value, tuple(theta)))
    scored.sort(key=lambda pair: pair[0])
    for _, theta in scored[:MONO_NM_STARTS]:
        minimize(
            tracker,
            np.asarray(theta, dtype=float),
            method="Nelder-Mead",
            options={
                "maxiter": MONO_NM_MAX_ITER,
                "xatol": MONO_NM_XATOL,
                "fatol": np.inf,
                "adaptive": False,
            },
        )
    if tracker.best_theta is None:
        raise FitError("every optimizer start failed numerically")
    sv, ls, nv = 10.0**tracker.best_theta
    hyper = GpHyperparameters(float(sv), float(ls), float(nv))
    return make_fitted_mono(training, grid, hyper)


def predict_mono(model: FittedMonoGp, Xq) -> PosteriorSummary:
    """Posterior mean and variance at query points, using the EP sites as
    pseudo-observations alongside the real data."""
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
    hyper = model.hyper
    k_f = se_gram(Xq, model.training.X, hyper)
    if len(model.active_dims) > 0:
        k_z = cross_gram_value_deriv(
            Xq, model.active_points, model.active_dims, hyper
        )
        k_star = np.hstack([k_f, k_z])
    else:
        k_star = k_f
    mean = k_star @ model.obs_alpha + model.mean_offset
    v = solve_triangular(model.obs_chol, k_star.T, lower=True, check_finite=False)
    variance = hyper.signal_variance - np.sum(v * v, axis=0)
    return PosteriorSummary(mean=mean, variance=np.maximum(variance, 0.0))


def derivative_posterior_means(model: FittedMonoGp) -> np.ndarray:
    """Posterior means of the derivative latents, one per grid constraint."""
    return model.latent.mean[model.training.n :]
