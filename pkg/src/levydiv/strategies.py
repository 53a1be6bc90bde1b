"""Admissible payout strategies beyond the double barrier, and the
common-random-number tournament that ranks them.

Every strategy here injects capital continuously at 0, so the controlled
surplus never goes negative and admissibility holds by construction; the
specs only validate parameter sanity.  The tournament estimates every
(strategy, start) cell on one shared path set, so rankings are differences
of coupled samples, not of independent runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .mc import MCEstimate, _est, _npv_bounds, _parallel, _TAIL_FRAC
from .models import LevyModel, ProblemParams, linear_drift, validate_model
from .paths import PathSpec, _path_arrays

__all__ = [
    "StrategySpec",
    "double_barrier",
    "periodic_review",
    "hysteresis",
    "strategy_npv_samples",
    "estimate_strategy_npv",
    "TournamentResult",
    "tournament",
]

_KINDS = ("double_barrier", "periodic_review", "hysteresis")


@dataclass(frozen=True)
class StrategySpec:
    """One admissible payout rule.

    double_barrier(a): pay the excess above a continuously.
    periodic_review(a, review_dt): skim the excess above a only at multiples
    of review_dt.
    hysteresis(a, lower): on reaching a, pay a lump down to lower < a.
    All three inject continuously at 0."""

    kind: str
    barrier: float
    review_dt: float | None = None
    lower: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("unknown strategy kind %r" % (self.kind,))
        if not self.barrier >= 0.0:
            raise ValueError("barrier must be nonnegative")
        if self.kind != "double_barrier" and not self.barrier > 0.0:
            raise ValueError("barrier must be positive for %s" % self.kind)
        if self.kind == "periodic_review":
            if self.review_dt is None or not self.review_dt > 0.0:
                raise ValueError("periodic_review needs review_dt > 0")
        elif self.review_dt is not None:
            raise ValueError("review_dt only applies to periodic_review")
        if self.kind == "hysteresis":
            if self.lower is None or not 0.0 <= self.lower < self.barrier:
                raise ValueError("hysteresis needs 0 <= lower < barrier")
        elif self.lower is not None:
            raise ValueError("lower only applies to hysteresis")

    @property
    def label(self) -> str:
        if self.kind == "double_barrier":
            return "double_barrier(a=%g)" % self.barrier
        if self.kind == "periodic_review":
            return "periodic_review(a=%g, dt=%g)" % (self.barrier, self.review_dt)
        return "hysteresis(a=%g, b=%g)" % (self.barrier, self.lower)


def double_barrier(a: float) -> StrategySpec:
    return StrategySpec(kind="double_barrier", barrier=a)


def periodic_review(a: float, review_dt: float) -> StrategySpec:
    return StrategySpec(kind="periodic_review", barrier=a, review_dt=review_dt)


def hysteresis(a: float, lower: float) -> StrategySpec:
    return StrategySpec(kind="hysteresis", barrier=a, lower=lower)


def _review_flags(times: np.ndarray, dt: float) -> np.ndarray:
    # flag the first row at or past each multiple of dt (1e-12 guards the
    # exact-multiple rows against float division wobble)
    idx = np.floor((times + 1e-12) / dt)
    prev = np.concatenate([[0.0], idx[:-1]])
    return idx > prev


def strategy_npv_samples(
    model: LevyModel,
    params: ProblemParams,
    xs,
    strategies,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
):
    """Per-path discounted regulator totals for every (strategy, start) on
    shared paths.  Returns (vl, vr, tl, tr), each (n_strategies, n_starts,
    n_paths)."""
    validate_model(model)
    if not isinstance(params, ProblemParams):
        raise TypeError("params must be ProblemParams")
    if not isinstance(spec, PathSpec):
        raise TypeError("spec must be PathSpec")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    strategies = list(strategies)
    is_bv = model.sigma == 0.0
    for s in strategies:
        if s.kind == "double_barrier" and s.barrier == 0.0 and not is_bv:
            raise ValueError("zero barrier requires bounded variation")
    q = params.discount
    T = spec.horizon
    tail_t0 = T * (1.0 - _TAIL_FRAC)
    ns, nx = len(strategies), xs.size
    vl = np.empty((ns, nx, n_paths))
    vr = np.empty((ns, nx, n_paths))
    tl = np.empty((ns, nx, n_paths))
    tr = np.empty((ns, nx, n_paths))
    d = linear_drift(model)

    rdts = sorted({s.review_dt for s in strategies if s.kind == "periodic_review"})

    def one(i):
        times, cont, jump, _ = _path_arrays(model, replace(spec, path_index=spec.path_index + i))
        if is_bv and rdts:
            # jump-time rows alone would defer review payouts to the next
            # event; splice the review epochs in as zero-jump rows (exact for
            # piecewise-linear drift segments)
            extra = np.concatenate(
                [dt * np.arange(1.0, math.floor(T / dt) + 0.5) for dt in rdts]
            )
            merged = np.union1d(times, extra)
            pos = np.searchsorted(merged, times)
            jnew = np.zeros(merged.size)
            jnew[pos] = jump
            cnew = np.zeros(merged.size)
            cnew[pos] = cont
            times, cont, jump = merged, cnew, jnew
        reviews = {dt: _review_flags(times, dt) for dt in rdts}
        for si, s in enumerate(strategies):
            for xi, x in enumerate(xs):
                if s.kind == "double_barrier":
                    if s.barrier == 0.0:
                        out = _kernels.zero_policy_npv(times, cont, jump, x, d, q, T, tail_t0)
                    else:
                        out = _kernels.npv_kernel(times, cont, jump, x, s.barrier, d, is_bv, q, tail_t0)
                elif s.kind == "periodic_review":
                    out = _kernels.periodic_review_kernel(
                        times, cont, jump, reviews[s.review_dt], x, s.barrier, d, is_bv, q, tail_t0
                    )
                else:
                    out = _kernels.hysteresis_kernel(
                        times, cont, jump, x, s.barrier, s.lower, d, is_bv, q, tail_t0
                    )
                vl[si, xi, i], vr[si, xi, i], tl[si, xi, i], tr[si, xi, i] = out

    _parallel(n_paths, one, n_workers)
    return vl, vr, tl, tr


def estimate_strategy_npv(
    model: LevyModel,
    params: ProblemParams,
    x: float,
    strategy: StrategySpec,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
) -> MCEstimate:
    """Value (dividends minus beta times injections) of one strategy."""
    vl, vr, tl, tr = strategy_npv_samples(
        model, params, [x], [strategy], n_paths, spec, n_workers
    )
    beta = params.injection_cost
    bl, br = _npv_bounds(params, spec.horizon, tl[0, 0], tr[0, 0])
    return _est(vl[0, 0] - beta * vr[0, 0], bl + beta * br)


@dataclass(frozen=True)
class TournamentResult:
    """CRN ranking of strategies[0] (the champion) against the rest.

    margin[j, k] is the mean pathwise value gap champion - strategies[j] at
    x_grid[k] (row 0 is identically 0); dominated[j, k] says the champion's
    value is at least the competitor's up to the 3-stderr dead band."""

    strategies: list
    x_grid: np.ndarray
    values: np.ndarray  # (ns, nx) object array of MCEstimate
    margin: np.ndarray  # (ns, nx) mean of per-path value gaps
    margin_stderr: np.ndarray
    paths_per_cell: int

    @property
    def dominated(self) -> np.ndarray:
        return self.margin >= -3.0 * self.margin_stderr

    @property
    def champion_ranks_first(self) -> bool:
        return bool(np.all(self.dominated))

    def rows(self):
        """Flat per-cell records, ready for CSV or JSON emission."""
        out = []
        for j, s in enumerate(self.strategies):
            for k, x in enumerate(self.x_grid):
                e = self.values[j, k]
                out.append(
                    {
                        "strategy": s.label,
                        "x": float(x),
                        "value_mean": e.mean,
                        "value_stderr": e.stderr,
                        "margin": float(self.margin[j, k]),
                        "margin_stderr": float(self.margin_stderr[j, k]),
                        "dominated": bool(self.dominated[j, k]),
                    }
                )
        return out


def tournament(
    model: LevyModel,
    params: ProblemParams,
    strategies,
    x_grid,
    mc_budget: int,
    spec: PathSpec,
    n_workers: int = 1,
) -> TournamentResult:
    """Rank strategies[0] against the rest on shared paths.

    mc_budget caps path evaluations (paths times strategy-start cells); the
    dead band uses the stderr of the pathwise value differences, which the
    coupling keeps far below the cell stderrs."""
    strategies = list(strategies)
    if not strategies:
        raise ValueError("need at least one strategy")
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    ns, nx = len(strategies), x_grid.size
    n_paths = mc_budget // (ns * nx)
    if n_paths < 2:
        raise ValueError("mc_budget too small for the strategy/start grid")
    vl, vr, tl, tr = strategy_npv_samples(
        model, params, x_grid, strategies, n_paths, spec, n_workers
    )
    beta = params.injection_cost
    vals = vl - beta * vr
    values = np.empty((ns, nx), dtype=object)
    for j in range(ns):
        for k in range(nx):
            bl, br = _npv_bounds(params, spec.horizon, tl[j, k], tr[j, k])
            values[j, k] = _est(vals[j, k], bl + beta * br)
    gaps = vals[0][None, :, :] - vals
    margin = gaps.mean(axis=2)
    sd = gaps.std(axis=2, ddof=1)
    margin_stderr = sd / math.sqrt(n_paths)
    return TournamentResult(
        strategies=strategies,
        x_grid=x_grid,
        values=values,
        margin=margin,
        margin_stderr=margin_stderr,
        paths_per_cell=n_paths,
    )
