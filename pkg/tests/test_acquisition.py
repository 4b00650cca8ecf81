import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import qmc

from monobo.acquisition import Candidate, expected_improvement, maximize_ei
from monobo.gp_core import TrainingSet, make_fitted, predict
from monobo.kernel import GpHyperparameters


def gp_predictor(X, y, hyper):
    model = make_fitted(TrainingSet(X, y), hyper)
    return lambda Xq: predict(model, Xq)


def test_ei_at_best_with_unit_spread_is_standard_normal_density():
    assert expected_improvement(1.3, 1.0, 1.3) == pytest.approx(
        1.0 / np.sqrt(2.0 * np.pi), rel=1e-12
    )


def test_ei_degenerate_spread():
    assert expected_improvement(0.8, 0.0, 0.5) == pytest.approx(0.3, rel=1e-12)
    assert expected_improvement(0.2, 0.0, 0.5) == 0.0


def test_ei_vanishing_tail():
    assert 0.0 <= expected_improvement(-10.0, 0.01, 0.0) < 1e-12


def test_ei_rejects_negative_variance():
    with pytest.raises(ValueError):
        expected_improvement(0.0, -1e-9, 0.0)


def test_ei_matches_monte_carlo():
    rng = np.random.default_rng(79)
    draws = rng.standard_normal(200_000)
    checked = 0
    while checked < 50:
        mean = float(rng.uniform(-2, 2))
        s = float(rng.uniform(0.05, 1.5))
        best = float(rng.uniform(-2, 2))
        samples = np.maximum(mean + s * draws - best, 0.0)
        # the 3-SE bound needs enough improvement mass for the CLT to apply
        if np.count_nonzero(samples) < 0.01 * len(samples):
            continue
        mc = samples.mean()
        se = samples.std() / np.sqrt(len(samples))
        assert abs(expected_improvement(mean, s * s, best) - mc) <= 3.0 * se
        checked += 1


@given(
    m1=st.floats(-3, 3),
    dm=st.floats(1e-6, 2.0),
    s=st.floats(0.01, 2.0),
    best=st.floats(-3, 3),
)
@settings(max_examples=100, deadline=None)
def test_ei_strictly_increasing_in_mean(m1, dm, s, best):
    lo = expected_improvement(m1, s * s, best)
    hi = expected_improvement(m1 + dm, s * s, best)
    assert hi >= lo
    if lo > 1e-12:
        assert hi > lo


@given(
    mean=st.floats(-3, 3),
    s1=st.floats(0.0, 2.0),
    ds=st.floats(0.0, 1.0),
    best=st.floats(-3, 3),
)
@settings(max_examples=100, deadline=None)
def test_ei_nondecreasing_in_spread_and_nonnegative(mean, s1, ds, best):
    s2 = s1 + ds
    lo = expected_improvement(mean, s1 * s1, best)
    hi = expected_improvement(mean, s2 * s2, best)
    assert lo >= 0.0
    assert hi >= lo - 1e-12


def test_maximize_ei_matches_dense_grid_single_observation():
    # constant posterior mean, so EI grows with predictive spread and the
    # argmax sits at the far edge of the domain
    predictor = gp_predictor(
        np.array([[0.3]]), np.array([1.0]), GpHyperparameters(1.0, 0.2, 0.01)
    )
    best = 1.0
    cand = maximize_ei(predictor, d=1, best=best, seed=3)
    grid = np.linspace(0.0, 1.0, 100_001)[:, None]
    post = predictor(grid)
    ei_grid = expected_improvement(post.mean, post.variance, best)
    x_grid = float(grid[np.argmax(ei_grid), 0])
    assert abs(cand.x[0] - x_grid) <= 1e-3
    assert cand.ei >= float(np.max(ei_grid)) - 1e-9


def test_maximize_ei_matches_dense_grid_two_observations():
    predictor = gp_predictor(
        np.array([[0.15], [0.7]]),
        np.array([0.2, 1.1]),
        GpHyperparameters(0.8, 0.15, 0.05),
    )
    best = 1.1
    cand = maximize_ei(predictor, d=1, best=best, seed=11)
    grid = np.linspace(0.0, 1.0, 100_001)[:, None]
    post = predictor(grid)
    ei_grid = expected_improvement(post.mean, post.variance, best)
    x_grid = float(grid[np.argmax(ei_grid), 0])
    assert abs(cand.x[0] - x_grid) <= 1e-3


def test_maximize_ei_deterministic():
    predictor = gp_predictor(
        np.array([[0.2, 0.6], [0.8, 0.1]]),
        np.array([0.0, 1.0]),
        GpHyperparameters(1.0, 0.3, 0.05),
    )
    a = maximize_ei(predictor, d=2, best=1.0, seed=7)
    b = maximize_ei(predictor, d=2, best=1.0, seed=7)
    assert a.x == b.x
    assert a.ei == b.ei


def test_maximize_ei_flat_zero_surface_returns_first_candidate():
    class Flat:
        mean = None
        variance = None

    def predictor(Xq):
        Flat.mean = np.full(len(Xq), -5.0)
        Flat.variance = np.zeros(len(Xq))
        return Flat

    cand = maximize_ei(predictor, d=2, best=0.0, seed=13)
    first = qmc.Sobol(d=2, scramble=True, seed=13).random_base2(11)[0]
    assert cand.ei == 0.0
    np.testing.assert_allclose(cand.x, first)


def test_maximize_ei_stays_inside_cube():
    rng = np.random.default_rng(83)
    for seed in range(3):
        X = rng.uniform(size=(4, 2))
        y = rng.normal(size=4)
        predictor = gp_predictor(X, y, GpHyperparameters(1.0, 0.25, 0.02))
        cand = maximize_ei(predictor, d=2, best=float(y.max()), seed=seed)
        assert all(0.0 <= v <= 1.0 for v in cand.x)


def test_candidate_rejects_negative_ei():
    with pytest.raises(ValueError):
        Candidate(x=(0.5,), ei=-1e-9)
