"""Monte Carlo drivers: exact identities, cross-validation against the
trajectory-level integrator, and common-random-number orderings."""
import math

import numpy as np
import pytest

from levydiv.mc import (
    default_horizon,
    discounted_integral,
    drawdown_laplace,
    estimate_npv,
    exit_laplace,
    first_dividend_laplace,
    npv_fd_barrier,
    npv_fd_start,
    npv_samples,
)
from levydiv.models import (
    Exponential,
    JumpSpec,
    LevyModel,
    ProblemParams,
    linear_drift,
)
from levydiv.paths import PathSpec, simulate_path
from levydiv.reflect import doubly_reflect, zero_barrier

BV = LevyModel(
    gamma=0.3,
    sigma=0.0,
    jumps=JumpSpec(rate=2.0, prob_positive=0.5, positive=Exponential(2.0), negative=Exponential(2.5)),
)
UBV = LevyModel(
    gamma=0.1,
    sigma=0.4,
    jumps=JumpSpec(rate=1.5, prob_positive=0.4, positive=Exponential(3.0), negative=Exponential(2.0)),
)
# drift model with a vanishing jump rate: valid (not monotone) but no jump
# lands on the horizons drawn below, so every path is the same ramp
DRIFT = LevyModel(
    gamma=0.7,
    sigma=0.0,
    jumps=JumpSpec(rate=1e-9, prob_positive=0.0, negative=Exponential(2.0)),
)
PAR = ProblemParams(discount=0.3, injection_cost=1.5)


def _assert_no_jumps(spec, n):
    for i in range(n):
        p = simulate_path(DRIFT, PathSpec(spec.horizon, spec.grid_step, spec.seed, i))
        assert np.all(p.jump == 0.0)


def test_default_horizon():
    T = default_horizon(PAR)
    assert math.isclose(T, math.log(1e6) / 0.3, rel_tol=1e-12)
    assert math.isclose(default_horizon(PAR, eps=1e-4), math.log(1e4) / 0.3, rel_tol=1e-12)


def test_discounted_integral_pure_drift():
    # deterministic upward drift from x = a: dividends accrue at rate d from
    # time 0, so the discounted total is d (1 - e^{-qT}) / q
    d = linear_drift(DRIFT)
    q = PAR.discount
    T = 8.0
    spec = PathSpec(horizon=T, grid_step=0.1, seed=1, path_index=0)
    _assert_no_jumps(spec, 1)
    p = simulate_path(DRIFT, spec)
    a = 1.2
    traj = doubly_reflect(p, a, a)
    got = discounted_integral(traj, q, "dividends")
    assert math.isclose(got, d * (1.0 - math.exp(-q * T)) / q, rel_tol=1e-12)
    assert discounted_integral(traj, q, "injections") == 0.0


def test_discounted_integral_engagement_delay():
    # from x < a the drift takes (a - x)/d to engage the barrier
    d = linear_drift(DRIFT)
    q = PAR.discount
    T = 8.0
    x, a = 0.4, 1.2
    th = (a - x) / d
    spec = PathSpec(horizon=T, grid_step=0.1, seed=1, path_index=0)
    traj = doubly_reflect(simulate_path(DRIFT, spec), x, a)
    got = discounted_integral(traj, q, "dividends")
    assert math.isclose(got, d * (math.exp(-q * th) - math.exp(-q * T)) / q, rel_tol=1e-12)


@pytest.mark.parametrize("model", [BV, UBV], ids=["bv", "ubv"])
@pytest.mark.parametrize("x", [-0.3, 0.2, 0.9, 1.6])
def test_npv_kernel_matches_trajectory_integral(model, x):
    # the fused kernel and the reflect-then-integrate route are independent
    # implementations of the same discounted totals
    a = 1.1
    q = PAR.discount
    spec = PathSpec(horizon=12.0, grid_step=0.02, seed=9, path_index=0)
    vl, vr, _, _ = npv_samples(model, PAR, [x], [a], 6, spec)
    for i in range(6):
        sp = PathSpec(horizon=12.0, grid_step=0.02, seed=9, path_index=i)
        traj = doubly_reflect(simulate_path(model, sp), x, a)
        assert math.isclose(vl[0, 0, i], discounted_integral(traj, q, "dividends"), abs_tol=1e-10)
        assert math.isclose(vr[0, 0, i], discounted_integral(traj, q, "injections"), abs_tol=1e-10)


@pytest.mark.parametrize("x", [-0.5, 0.0, 0.8])
def test_zero_policy_matches_trajectory_integral(x):
    q = PAR.discount
    spec = PathSpec(horizon=12.0, grid_step=0.02, seed=21, path_index=0)
    vl, vr, _, _ = npv_samples(BV, PAR, [x], [0.0], 5, spec)
    for i in range(5):
        sp = PathSpec(horizon=12.0, grid_step=0.02, seed=21, path_index=i)
        traj = zero_barrier(simulate_path(BV, sp), x)
        assert math.isclose(vl[0, 0, i], discounted_integral(traj, q, "dividends"), abs_tol=1e-10)
        assert math.isclose(vr[0, 0, i], discounted_integral(traj, q, "injections"), abs_tol=1e-10)


def test_zero_policy_needs_bounded_variation():
    spec = PathSpec(horizon=4.0, grid_step=0.02, seed=1, path_index=0)
    with pytest.raises(ValueError):
        npv_samples(UBV, PAR, [0.5], [0.0], 2, spec)


@pytest.mark.parametrize("model", [BV, UBV], ids=["bv", "ubv"])
def test_start_above_barrier_translates(model):
    # starting above the barrier only adds the time-0 lump: per path,
    # L(x) = L(a) + (x - a) and R is untouched
    a, x = 0.9, 1.7
    spec = PathSpec(horizon=10.0, grid_step=0.05, seed=4, path_index=0)
    vl, vr, _, _ = npv_samples(model, PAR, [a, x], [a], 40, spec)
    assert np.max(np.abs(vl[0, 1] - vl[0, 0] - (x - a))) < 1e-12
    assert np.max(np.abs(vr[0, 1] - vr[0, 0])) < 1e-12


@pytest.mark.parametrize("model", [BV, UBV], ids=["bv", "ubv"])
def test_start_below_zero_translates(model):
    a, x = 0.9, -0.6
    spec = PathSpec(horizon=10.0, grid_step=0.05, seed=4, path_index=0)
    vl, vr, _, _ = npv_samples(model, PAR, [0.0, x], [a], 40, spec)
    assert np.max(np.abs(vr[0, 1] - vr[0, 0] - (-x))) < 1e-12
    assert np.max(np.abs(vl[0, 1] - vl[0, 0])) < 1e-12


def test_worker_count_invariance():
    spec = PathSpec(horizon=8.0, grid_step=0.05, seed=13, path_index=0)
    e1 = estimate_npv(UBV, PAR, 0.5, 1.0, 60, spec, n_workers=1)
    e3 = estimate_npv(UBV, PAR, 0.5, 1.0, 60, spec, n_workers=3)
    assert e1.value.mean == e3.value.mean
    assert e1.value.stderr == e3.value.stderr


def test_exit_edge_starts():
    spec = PathSpec(horizon=8.0, grid_step=0.02, seed=2, path_index=0)
    a = 1.0
    res = exit_laplace(UBV, PAR, [0.0, a], a, 30, spec)
    assert res[0].down.mean == 1.0 and res[0].down.stderr == 0.0
    assert res[0].up.mean == 0.0
    assert res[1].up.mean == 1.0 and res[1].up.stderr == 0.0
    # bounded variation with downward drift: start at 0 is not yet ruin
    neg = LevyModel(gamma=-0.2, sigma=0.0, jumps=BV.jumps)
    r0 = exit_laplace(neg, PAR, 0.0, a, 30, spec)
    assert r0.down.mean == 1.0  # d < 0 leaves 0 immediately
    pos = exit_laplace(BV, PAR, 0.0, a, 200, spec)
    assert pos.down.mean < 1.0  # d > 0 moves up off the boundary


def test_exit_crn_monotone_in_start():
    spec = PathSpec(horizon=12.0, grid_step=0.02, seed=7, path_index=0)
    res = exit_laplace(UBV, PAR, [0.2, 0.5, 0.8], 1.0, 300, spec)
    ups = [r.up.mean for r in res]
    downs = [r.down.mean for r in res]
    assert ups[0] < ups[1] < ups[2]
    assert downs[0] > downs[1] > downs[2]


def test_exit_laplace_rejects_outside():
    spec = PathSpec(horizon=4.0, grid_step=0.02, seed=1, path_index=0)
    with pytest.raises(ValueError):
        exit_laplace(UBV, PAR, [-0.1], 1.0, 4, spec)
    with pytest.raises(ValueError):
        exit_laplace(UBV, PAR, [1.1], 1.0, 4, spec)


def test_drawdown_crn_monotone_in_barrier():
    # reflected-above paths at two ceilings differ by the ceiling gap, so
    # ruin from the higher start comes later on every path
    spec = PathSpec(horizon=12.0, grid_step=0.02, seed=5, path_index=0)
    res = drawdown_laplace(UBV, PAR, [0.6, 0.9, 1.3], 300, spec)
    assert res[0].mean > res[1].mean > res[2].mean


def test_first_dividend_trivial_and_interior():
    spec = PathSpec(horizon=12.0, grid_step=0.02, seed=6, path_index=0)
    res = first_dividend_laplace(UBV, PAR, [1.5, 1.0, 0.3], 1.0, 200, spec)
    assert res[0].mean == 1.0 and res[0].stderr == 0.0
    assert res[1].mean == 1.0
    assert 0.0 < res[2].mean < 1.0


def test_fd_drivers_match_deterministic_quotients():
    # on a jump-free drift model every path is the same deterministic
    # trajectory, so the pathwise difference quotients must equal the
    # closed-form quotients of v(x, a) = d (e^{-q(a-x)/d} - e^{-qT}) / q
    d = linear_drift(DRIFT)
    q = PAR.discount
    T = 20.0
    spec = PathSpec(horizon=T, grid_step=0.1, seed=3, path_index=0)
    _assert_no_jumps(spec, 3)
    x, a, eps = 0.5, 1.1, 0.04

    def v(x_, a_):
        th = max(a_ - x_, 0.0) / d
        return d * (math.exp(-q * th) - math.exp(-q * T)) / q + max(x_ - a_, 0.0)

    got = npv_fd_barrier(DRIFT, PAR, x, a, eps, 3, spec, richardson=False)
    want = (v(x, a + eps) - v(x, a)) / eps
    assert math.isclose(got.mean, want, rel_tol=1e-10)
    assert got.stderr == 0.0

    got_r = npv_fd_barrier(DRIFT, PAR, x, a, eps, 3, spec, richardson=True)
    want_r = 2.0 * (v(x, a + 0.5 * eps) - v(x, a)) / (0.5 * eps) - want
    assert math.isclose(got_r.mean, want_r, rel_tol=1e-10)

    got_x = npv_fd_start(DRIFT, PAR, x, a, eps, 3, spec)
    want_x = (v(x + eps, a) - v(x - eps, a)) / (2.0 * eps)
    assert math.isclose(got_x.mean, want_x, rel_tol=1e-10)


def test_fd_start_validates_window():
    spec = PathSpec(horizon=4.0, grid_step=0.05, seed=1, path_index=0)
    with pytest.raises(ValueError):
        npv_fd_start(UBV, PAR, 0.02, 1.0, 0.05, 2, spec)
