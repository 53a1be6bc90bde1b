"""Strategy specs, their kernels, and the common-random-number tournament."""
import math

import numpy as np
import pytest

from levydiv.mc import npv_samples
from levydiv.models import Exponential, JumpSpec, LevyModel, ProblemParams
from levydiv.paths import PathSpec
from levydiv.strategies import (
    StrategySpec,
    _review_flags,
    double_barrier,
    estimate_strategy_npv,
    hysteresis,
    periodic_review,
    strategy_npv_samples,
    tournament,
)

Q = 0.3
PAR = ProblemParams(discount=Q, injection_cost=1.8)
CL = LevyModel(
    gamma=0.6436,
    sigma=0.0,
    jumps=JumpSpec(rate=1.2, prob_positive=0.0, negative=Exponential(2.0)),
)
BM = LevyModel(gamma=0.25, sigma=0.45, jumps=None)
A = 0.62


def _spec(seed, horizon=35.0, grid_step=0.02):
    return PathSpec(horizon=horizon, grid_step=grid_step, seed=seed, path_index=0)


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown strategy kind"):
        StrategySpec(kind="ratchet", barrier=1.0)
    with pytest.raises(ValueError, match="nonnegative"):
        StrategySpec(kind="double_barrier", barrier=-0.5)
    with pytest.raises(ValueError, match="positive for periodic_review"):
        StrategySpec(kind="periodic_review", barrier=0.0, review_dt=0.5)
    with pytest.raises(ValueError, match="review_dt > 0"):
        StrategySpec(kind="periodic_review", barrier=1.0)
    with pytest.raises(ValueError, match="review_dt only"):
        StrategySpec(kind="double_barrier", barrier=1.0, review_dt=0.5)
    with pytest.raises(ValueError, match="lower < barrier"):
        StrategySpec(kind="hysteresis", barrier=1.0, lower=1.0)
    with pytest.raises(ValueError, match="lower only"):
        StrategySpec(kind="double_barrier", barrier=1.0, lower=0.5)
    assert double_barrier(0.0).barrier == 0.0  # pay-everything is a valid spec


def test_labels():
    assert double_barrier(0.62).label == "double_barrier(a=0.62)"
    assert periodic_review(0.62, 0.25).label == "periodic_review(a=0.62, dt=0.25)"
    assert hysteresis(0.62, 0.31).label == "hysteresis(a=0.62, b=0.31)"


def test_review_flags_mark_first_row_past_each_epoch():
    times = np.array([0.3, 0.5, 0.9, 1.0, 1.7, 2.4])
    flags = _review_flags(times, 0.5)
    # epochs 0.5, 1.0, 1.5, 2.0 -> rows 0.5, 1.0, 1.7, 2.4
    assert flags.tolist() == [False, True, False, True, True, True]


def test_double_barrier_matches_npv_samples_exactly():
    # same kernel, same paths: the strategy wrapper adds nothing
    spec = _spec(210)
    slate = [double_barrier(A), hysteresis(A, 0.3)]
    vl_s, vr_s, _, _ = strategy_npv_samples(CL, PAR, [0.3, 0.7], slate, 300, spec)
    vl_m, vr_m, _, _ = npv_samples(CL, PAR, [0.3, 0.7], [A], 300, spec)
    assert np.array_equal(vl_s[0], vl_m[0])
    assert np.array_equal(vr_s[0], vr_m[0])


def test_review_rows_do_not_perturb_flankers():
    # splicing review epochs into bounded-variation paths only splits drift
    # segments; other strategies' totals move by roundoff at most
    spec = _spec(211)
    alone = strategy_npv_samples(CL, PAR, [0.4], [double_barrier(A)], 200, spec)
    flanked = strategy_npv_samples(
        CL, PAR, [0.4], [double_barrier(A), periodic_review(A, 0.5)], 200, spec
    )
    assert np.max(np.abs(alone[0][0] - flanked[0][0])) < 1e-9
    assert np.max(np.abs(alone[1][0] - flanked[1][0])) < 1e-9


def test_periodic_review_approaches_double_barrier():
    # payout delay vanishes with the review period
    spec = _spec(212)
    n = 4000
    slate = [double_barrier(A), periodic_review(A, 0.8), periodic_review(A, 0.05)]
    vl, vr, _, _ = strategy_npv_samples(CL, PAR, [0.4], slate, n, spec)
    beta = PAR.injection_cost
    vals = vl[:, 0, :] - beta * vr[:, 0, :]
    gap_coarse = np.mean(vals[0] - vals[1])
    gap_fine = np.mean(vals[0] - vals[2])
    se = np.std(vals[0] - vals[2], ddof=1) / math.sqrt(n)
    assert gap_fine < gap_coarse
    assert gap_fine < 0.01 + 3.0 * se
    assert gap_fine > -3.0 * se  # the barrier strategy is never beaten


def test_hysteresis_tightens_to_double_barrier():
    # as the reset level rises to the barrier the lumps shrink to reflection
    spec = _spec(213)
    n = 4000
    slate = [double_barrier(A), hysteresis(A, 0.2), hysteresis(A, A - 0.01)]
    vl, vr, _, _ = strategy_npv_samples(CL, PAR, [0.4], slate, n, spec)
    beta = PAR.injection_cost
    vals = vl[:, 0, :] - beta * vr[:, 0, :]
    gap_loose = np.mean(vals[0] - vals[1])
    gap_tight = np.mean(vals[0] - vals[2])
    se = np.std(vals[0] - vals[2], ddof=1) / math.sqrt(n)
    assert gap_tight < gap_loose
    assert abs(gap_tight) < 0.01 + 3.0 * se


def test_zero_barrier_needs_bounded_variation():
    with pytest.raises(ValueError, match="bounded variation"):
        strategy_npv_samples(BM, PAR, [0.4], [double_barrier(0.0)], 50, _spec(214, grid_step=0.01))


def test_estimate_strategy_npv_reduces_samples():
    spec = _spec(215)
    est = estimate_strategy_npv(CL, PAR, 0.4, double_barrier(A), 500, spec)
    vl, vr, _, _ = strategy_npv_samples(CL, PAR, [0.4], [double_barrier(A)], 500, spec)
    vals = vl[0, 0] - PAR.injection_cost * vr[0, 0]
    assert math.isclose(est.mean, float(np.mean(vals)), rel_tol=1e-12)
    assert est.n_paths == 500


def test_tournament_shapes_and_champion_row():
    spec = _spec(216)
    slate = [double_barrier(A), double_barrier(0.3), periodic_review(A, 0.5)]
    res = tournament(CL, PAR, slate, [0.3, 0.7], 6000, spec)
    assert res.margin.shape == (3, 2)
    assert np.all(res.margin[0] == 0.0)
    assert np.all(res.margin_stderr[0] == 0.0)
    assert res.paths_per_cell == 6000 // 6
    rows = res.rows()
    assert len(rows) == 6
    assert set(rows[0]) == {
        "strategy",
        "x",
        "value_mean",
        "value_stderr",
        "margin",
        "margin_stderr",
        "dominated",
    }
    assert res.champion_ranks_first


def test_tournament_is_deterministic():
    spec = _spec(217)
    slate = [double_barrier(A), hysteresis(A, 0.3)]
    r1 = tournament(CL, PAR, slate, [0.4], 2000, spec)
    r2 = tournament(CL, PAR, slate, [0.4], 2000, spec)
    assert np.array_equal(r1.margin, r2.margin)
    assert np.array_equal(r1.margin_stderr, r2.margin_stderr)


def test_tournament_flags_a_bad_champion():
    # champion far below the good barrier: negative margins, not dominated
    spec = _spec(218)
    res = tournament(CL, PAR, [double_barrier(0.05), double_barrier(A)], [0.4], 4000, spec)
    assert res.margin[1, 0] < 0.0
    assert not bool(res.dominated[1, 0])
    assert not res.champion_ranks_first


def test_tournament_budget_too_small():
    with pytest.raises(ValueError, match="mc_budget"):
        tournament(CL, PAR, [double_barrier(A)], [0.4], 1, _spec(219))
