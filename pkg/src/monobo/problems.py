"""Built-in benchmark problems.

* A 1D objective built from Gaussian bumps that splits exactly into a
  non-decreasing plus a non-increasing component.
* Elastic-net hyperparameter tuning on generated regression data, with its
  own coordinate-descent solver; components are the negated training error
  and the negated generalization gap, so their sum is the negated validation
  error.
* A bridge to external objectives spoken to over a one-line-JSON subprocess
  protocol.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bo_loop import Problem
from .composite import ComponentSpec
from .errors import (
    ComponentArityError,
    MalformedResponseError,
    NumericError,
    ProcessFailedError,
    ProcessTimeoutError,
)

ILLUSTRATIVE_CENTERS = (0.5351, 0.3412, 0.3061, 0.3325)
ILLUSTRATIVE_SIGMA = 0.05

CD_TOL = 1e-8
CD_MAX_SWEEPS = 10_000
DEFAULT_TIMEOUT_S = 300.0


def _phi(y, sigma):
    return np.exp(-0.5 * (y / sigma) ** 2) / (sigma * np.sqrt(2.0 * np.pi))


def illustrative_components(x: float):
    """The two monotone parts of the bump-sum objective at scalar x.

    Component 1 clips each bump argument at zero from above (non-decreasing),
    component 2 from below (non-increasing); for every center exactly one
    clipped argument is zero, so the parts sum to 1 + the normalized bump sum.
    """
    centers = np.asarray(ILLUSTRATIVE_CENTERS)
    norm = len(centers) * _phi(0.0, ILLUSTRATIVE_SIGMA)
    rising = np.sum(_phi(np.minimum(x - centers, 0.0), ILLUSTRATIVE_SIGMA)) / norm
    falling = np.sum(_phi(np.maximum(x - centers, 0.0), ILLUSTRATIVE_SIGMA)) / norm
    return float(rising), float(falling)


class IllustrativeProblem(Problem):
    """Maximize 1 + a normalized sum of four Gaussian bumps on [0,1]."""

    dimension = 1
    name = "illustrative"
    specs = (
        ComponentSpec(name="rising", signs=(1,)),
        ComponentSpec(name="falling", signs=(-1,)),
    )

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(illustrative_components(float(x[0])))

    def total(self, x: float) -> float:
        centers = np.asarray(ILLUSTRATIVE_CENTERS)
        norm = len(centers) * _phi(0.0, ILLUSTRATIVE_SIGMA)
        return 1.0 + float(np.sum(_phi(x - centers, ILLUSTRATIVE_SIGMA))) / norm


@dataclass(frozen=True)
class ElasticNetProblem:
    """Generated train/validation regression data and true coefficients."""

    X_tr: np.ndarray
    y_tr: np.ndarray
    X_v: np.ndarray
    y_v: np.ndarray
    coefficients: np.ndarray
    seed: int

    def __post_init__(self):
        if self.X_tr.shape != (200, 100) or self.X_v.shape != (200, 100):
            raise ValueError("each design matrix must be 200 x 100")
        if np.count_nonzero(self.coefficients == 0.0) != 50:
            raise ValueError("exactly 50 coefficients must be zero")
        for arr in (self.X_tr, self.y_tr, self.X_v, self.y_v, self.coefficients):
            arr.flags.writeable = False


def generate_elastic_data(seed: int) -> ElasticNetProblem:
    """Standard-normal designs; half the true coefficients are zeroed by a
    seeded shuffle, the rest drawn with standard deviation 0.22; unit-variance
    observation noise, independent per set."""
    rng = np.random.default_rng(seed)
    X_tr = rng.standard_normal((200, 100))
    X_v = rng.standard_normal((200, 100))
    perm = rng.permutation(100)
    coef = np.zeros(100)
    coef[perm[50:]] = rng.normal(0.0, 0.22, size=50)
    y_tr = X_tr @ coef + rng.standard_normal(200)
    y_v = X_v @ coef + rng.standard_normal(200)
    return ElasticNetProblem(
        X_tr=X_tr, y_tr=y_tr, X_v=X_v, y_v=y_v, coefficients=coef, seed=seed
    )


def soft_threshold(rho: float, t: float) -> float:
    """Shrink rho toward zero by t, flooring at zero."""
    if rho > t:
        return rho - t
    if rho < -t:
        return rho + t
    return 0.0


@njit(cache=True)
def _cd_sweeps(X, y, beta, col_sq, l1, l2, tol, max_sweeps):
    """Cyclic coordinate descent on the elastic-net loss
    (1/(2n)) ||y - X beta||^2 + l1 ||beta||_1 + (l2/2) ||beta||^2,
    maintaining the residual incrementally.  Returns (sweeps, max change)."""
    n, p = X.shape
    resid = y - X @ beta
    sweeps = 0
    max_change = np.inf
    while sweeps < max_sweeps and max_change > tol:
        max_change = 0.0
        for j in range(p):
            old = beta[j]
            rho = 0.0
            for i in range(n):
                rho += X[i, j] * resid[i]
            rho = rho / n + col_sq[j] * old
            denom = col_sq[j] + l2
            if rho > l1:
                new = (rho - l1) / denom
            elif rho < -l1:
                new = (rho + l1) / denom
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                for i in range(n):
                    resid[i] -= X[i, j] * delta
                beta[j] = new
            change = abs(delta)
            if change > max_change:
                max_change = change
        sweeps += 1
    return sweeps, max_change


def elastic_net_fit(X, y, alpha: float, lam: float) -> np.ndarray:
    """Elastic-net coefficients by cyclic coordinate descent from a zero
    start, fixed cycle order, tolerance 1e-8 on the largest coefficient
    change, at most 10^4 sweeps."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if lam < 0.0:
        raise ValueError("lambda must be non-negative")
    n, p = X.shape
    col_sq = np.sum(X * X, axis=0) / n
    beta = np.zeros(p)
    sweeps, max_change = _cd_sweeps(
        X, y, beta, col_sq, lam * alpha, lam * (1.0 - alpha), CD_TOL, CD_MAX_SWEEPS
    )
    if max_change > CD_TOL:
        residual = kkt_residual(X, y, beta, alpha, lam)
        raise NumericError(
            f"coordinate descent stalled after {sweeps} sweeps: "
            f"last change {max_change:g}, KKT residual {residual:g}"
        )
    return beta


def kkt_residual(X, y, beta, alpha: float, lam: float) -> float:
    """Largest per-coordinate violation of the elastic-net optimality
    conditions (subgradient of the 1-norm handled by cases)."""
    n = X.shape[0]
    grad = -(X.T @ (y - X @ beta)) / n + lam * (1.0 - alpha) * beta
    l1 = lam * alpha
    worst = 0.0
    for j in range(X.shape[1]):
        if beta[j] > 0:
            r = abs(grad[j] + l1)
        elif beta[j] < 0:
            r = abs(grad[j] - l1)
        else:
            r = max(abs(grad[j]) - l1, 0.0)
        worst = max(worst, r)
    return worst


def half_mse(X, y, beta) -> float:
    """Mean squared error scaled by one half."""
    resid = y - X @ beta
    return float(resid @ resid) / (2.0 * len(y))


def elastic_objective(problem: ElasticNetProblem, theta) -> tuple:
    """Map theta in the unit square to (alpha, lambda), fit, and return the
    negated training error and negated generalization gap."""
    u1, u2 = float(theta[0]), float(theta[1])
    if not (0.0 <= u1 <= 1.0 and 0.0 <= u2 <= 1.0):
        raise ValueError("theta must lie in the unit square")
    alpha = u1
    lam = 2.0 ** (-10.0 + 10.0 * u2)
    beta = elastic_net_fit(problem.X_tr, problem.y_tr, alpha, lam)
    mse_tr = half_mse(problem.X_tr, problem.y_tr, beta)
    mse_v = half_mse(problem.X_v, problem.y_v, beta)
    return -mse_tr, -(mse_v - mse_tr)


class ElasticTuningProblem(Problem):
    """Tune (alpha, lambda) of the elastic net on generated data; components
    are the negated training error (falls with regularization) and the
    negated gap (rises with regularization)."""

    dimension = 2
    name = "elastic"
    specs = (
        ComponentSpec(name="neg-training-error", signs=(-1, -1)),
        ComponentSpec(name="neg-generalization-gap", signs=(1, 1)),
    )

    def __init__(self, data: ElasticNetProblem):
        self.data = data

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(elastic_objective(self.data, x))


@dataclass(frozen=True)
class Transform:
    """Map a unit-interval coordinate to the objective's native scale."""

    kind: str
    low: float
    high: float

    def __post_init__(self):
        if self.kind not in ("linear", "log2"):
            raise ValueError(f"unknown transform kind {self.kind!r}")

    def apply(self, u: float) -> float:
        value = self.low + (self.high - self.low) * u
        if self.kind == "log2":
            return 2.0**value
        return value


@dataclass(frozen=True)
class ExternalObjectiveSpec:
    """Everything needed to evaluate an external objective over stdin/stdout."""

    command: tuple
    dimension: int
    specs: tuple
    transforms: tuple
    timeout_s: float
    name: str = "external"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if len(self.specs) < 1:
            raise ValueError("need at least one component")
        if len(self.transforms) != self.dimension:
            raise ValueError("need one transform per dimension")
        if len(self.command) < 1:
            raise ValueError("command must be nonempty")


def load_problem_descriptor(path: str) -> ExternalObjectiveSpec:
    """Parse a problem descriptor JSON file."""
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    try:
        dimension = int(raw["dimension"])
        specs = tuple(
            ComponentSpec(name=str(c["name"]), signs=tuple(c["signs"]))
            for c in raw["components"]
        )
        command = tuple(str(part) for part in raw["command"])
        default_transforms = [{"kind": "linear", "low": 0.0, "high": 1.0}] * dimension
        transforms = tuple(
            Transform(kind=t.get("kind", "linear"), low=float(t["low"]), high=float(t["high"]))
            for t in raw.get("transforms", default_transforms)
        )
        timeout_s = float(raw.get("timeout_s", DEFAULT_TIMEOUT_S))
        name = str(raw.get("name", "external"))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"invalid problem descriptor {path}: {exc}") from exc
    return ExternalObjectiveSpec(
        command=command,
        dimension=dimension,
        specs=specs,
        transforms=transforms,
        timeout_s=timeout_s,
        name=name,
    )


def external_evaluate(spec: ExternalObjectiveSpec, x) -> np.ndarray:
    """One subprocess evaluation: a single JSON request line on the child's
    stdin, a single JSON response line on its stdout, exit code 0 required."""
    x = np.asarray(x, dtype=float).ravel()
    native = [t.apply(float(u)) for t, u in zip(spec.transforms, x)]
    request = json.dumps({"x": native}) + "\n"
    try:
        proc = subprocess.run(
            list(spec.command),
            input=request.encode("utf-8"),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=spec.timeout_s,
        )
    except subprocess.TimeoutExpired as exc:
        raise ProcessTimeoutError(
            f"{list(spec.command)} exceeded {spec.timeout_s:g}s"
        ) from exc
    if proc.returncode != 0:
        raise ProcessFailedError(
            f"{list(spec.command)} exited with code {proc.returncode}"
        )
    text = proc.stdout.decode("utf-8", errors="replace").strip()
    try:
        payload = json.loads(text)
        components = payload["components"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise MalformedResponseError(
            f"{list(spec.command)}: could not parse response {text!r}"
        ) from exc
    values = np.asarray(components, dtype=float).ravel()
    if values.shape[0] != len(spec.specs):
        raise ComponentArityError(
            f"expected {len(spec.specs)} components, got {values.shape[0]}"
        )
    return values


class ExternalProblem(Problem):
    """A Problem backed by an external command speaking the line protocol."""

    def __init__(self, spec: ExternalObjectiveSpec):
        self.spec = spec
        self.dimension = spec.dimension
        self.specs = spec.specs
        self.name = spec.name

    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        return external_evaluate(self.spec, x)
