"""Pathwise application of barrier controls.

A ControlledTrajectory records the surplus and both cumulative regulators at
event times.  Regulator increments split into an atomic part (landing exactly
at the row time: initial lump, jump overshoots, and all increments when
sigma > 0) and a remainder accrued uniformly over the preceding interval;
bounded-variation trajectories get extra rows at barrier engagement times so
the uniform-accrual reading is exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .models import LevyModel
from .paths import SamplePath

__all__ = [
    "ControlledTrajectory",
    "ReflectedPath",
    "HittingReport",
    "BarrierShiftCoupling",
    "InitialShiftCoupling",
    "skorokhod_step",
    "doubly_reflect",
    "zero_barrier",
    "reflect_above",
    "hitting_times",
    "coupled_barrier_shift",
    "coupled_initial_shift",
    "barrier_coupling_violations",
    "start_coupling_violations",
]


@dataclass(frozen=True)
class ControlledTrajectory:
    times: np.ndarray
    surplus: np.ndarray  # controlled state at row times (cadlag values)
    dividends: np.ndarray  # cumulative upper-regulator mass
    injections: np.ndarray  # cumulative lower-regulator mass
    dividend_atoms: np.ndarray  # atomic part of each row's dividend increment
    injection_atoms: np.ndarray
    barrier: float
    start: float


@dataclass(frozen=True)
class ReflectedPath:
    times: np.ndarray
    values: np.ndarray
    barrier: float
    start: float


@dataclass(frozen=True)
class HittingReport:
    """First passage times; None encodes 'never' (inf of an empty set)."""

    tau_plus: float | None
    tau_minus: float | None
    kappa: float | None = None


def skorokhod_step(u_prev: float, dx: float, a: float):
    """One two-sided reflection step on [0, a]: returns (u_new, dL, dR)."""
    if not 0.0 <= u_prev <= a:
        raise ValueError("state must lie in [0, a]")
    w = u_prev + dx
    dL = w - a if w > a else 0.0
    dR = -w if w < 0.0 else 0.0
    return min(a, max(0.0, w)), dL, dR


def _is_bv(path: SamplePath) -> bool:
    return path.sigma == 0.0


def doubly_reflect(path: SamplePath, x: float, a: float) -> ControlledTrajectory:
    """Double-barrier control: pay the excess above a, inject the shortfall
    below 0, including the time-0 lump that brings x into [0, a]."""
    if not a > 0.0:
        raise ValueError("barrier must be positive (use zero_barrier for a = 0)")
    m, t, u, l, r, la, ra = _kernels.reflect_rows(
        path.times, path.cont, path.jump, x, a, path.drift, _is_bv(path)
    )
    return ControlledTrajectory(
        times=t[:m].copy(),
        surplus=u[:m].copy(),
        dividends=l[:m].copy(),
        injections=r[:m].copy(),
        dividend_atoms=la[:m].copy(),
        injection_atoms=ra[:m].copy(),
        barrier=a,
        start=x,
    )


def zero_barrier(path: SamplePath, x: float) -> ControlledTrajectory:
    """Degenerate barrier a = 0: every increase is paid out, every decrease
    injected, and the surplus sits at 0.  Bounded variation only."""
    if not _is_bv(path):
        raise ValueError("zero barrier requires bounded variation (sigma = 0)")
    t, l, r, la, ra = _kernels.zero_policy_rows(
        path.times, path.cont, path.jump, x, path.drift
    )
    return ControlledTrajectory(
        times=t,
        surplus=np.zeros_like(t),
        dividends=l,
        injections=r,
        dividend_atoms=la,
        injection_atoms=ra,
        barrier=0.0,
        start=x,
    )


def reflect_above(path: SamplePath, x: float, a: float) -> ReflectedPath:
    """One-sided reflection from above: Y = x + X - max(sup(x + X) - a, 0)."""
    y = _kernels.reflect_above_rows(
        path.times, path.cont, path.jump, x, a, path.drift, _is_bv(path)
    )
    return ReflectedPath(
        times=np.concatenate([[0.0], path.times]), values=y, barrier=a, start=x
    )


def hitting_times(
    path: SamplePath,
    x: float,
    upper: float | None = None,
    lower: float | None = None,
    barrier: float | None = None,
) -> HittingReport:
    """Strict first passage times of x + X above `upper` and below `lower`,
    and of the barrier-reflected path below `lower` when `barrier` is given.

    Bounded-variation drift crossings are located exactly inside segments;
    with sigma > 0 a crossing is attributed to the right endpoint of the
    sub-step that produced it."""
    bv = _is_bv(path)
    d = path.drift
    tau_p = tau_m = None
    if upper is not None:
        tau_p = _first_passage(path, x, upper, +1, bv, d)
    if lower is not None:
        tau_m = _first_passage(path, x, lower, -1, bv, d)
    kappa = None
    if barrier is not None:
        lev = 0.0 if lower is None else lower
        refl = reflect_above(path, x, barrier)
        kappa = _first_below_on_rows(path, refl.values, lev, bv, d, barrier)
    return HittingReport(tau_plus=tau_p, tau_minus=tau_m, kappa=kappa)


def _first_passage(path, x, level, side, bv, d):
    if side > 0 and x > level:
        return 0.0
    if side < 0 and x < level:
        return 0.0
    if x == level and (path.sigma > 0.0 or (bv and d * side > 0.0)):
        return 0.0
    u = x
    tp = 0.0
    for i in range(path.times.size):
        t = path.times[i]
        w = u + (d * (t - tp) if bv else path.cont[i])
        if bv and d != 0.0:
            if side > 0 and d > 0.0 and w > level:
                return tp + (level - u) / d
            if side < 0 and d < 0.0 and w < level:
                return tp + (u - level) / (-d)
        if side > 0 and w > level:
            return t
        if side < 0 and w < level:
            return t
        u = w
        j = path.jump[i]
        if j != 0.0:
            u += j
            if side > 0 and u > level:
                return t
            if side < 0 and u < level:
                return t
        tp = t
    return None


def _first_below_on_rows(path, yvals, level, bv, d, barrier):
    y0 = yvals[0]
    if y0 < level:
        return 0.0
    if y0 == level and (path.sigma > 0.0 or (bv and d < 0.0)):
        return 0.0
    tp = 0.0
    for i in range(path.times.size):
        t = path.times[i]
        y_prev = yvals[i]
        if bv and d < 0.0:
            w = y_prev + d * (t - tp)
            if w < level:
                return tp + (y_prev - level) / (-d)
        # row value is post-jump and post-cap
        if yvals[i + 1] < level:
            return t
        # jump may have rescued an intra-row continuous crossing only when
        # d < 0 (handled above); with sigma > 0 detection is at row ends
        tp = t
    return None


@dataclass(frozen=True)
class BarrierShiftCoupling:
    """Systems at barriers a and a + eps driven by one path from one start.

    Difference series are indexed by path rows (time 0 first) and accumulated
    jointly in a single pass."""

    times: np.ndarray
    surplus_lo: np.ndarray  # barrier a
    surplus_hi: np.ndarray  # barrier a + eps
    dividend_gap: np.ndarray  # L^a - L^{a+eps}
    injection_gap: np.ndarray  # R^a - R^{a+eps}
    # barrier-a regulator increments, split by within-row order:
    # the continuous step settles before the jump lands
    dividend_inc_cont: np.ndarray
    injection_inc_cont: np.ndarray
    dividend_inc_jump: np.ndarray
    injection_inc_jump: np.ndarray
    barrier: float
    eps: float
    start: float


@dataclass(frozen=True)
class InitialShiftCoupling:
    times: np.ndarray
    surplus_lo: np.ndarray  # start x
    surplus_hi: np.ndarray  # start x + eps
    dividend_gap: np.ndarray  # L^{x+eps} - L^{x}
    injection_gap: np.ndarray  # R^{x} - R^{x+eps}
    barrier: float
    eps: float
    start: float


def coupled_barrier_shift(
    path: SamplePath, x: float, a: float, eps: float
) -> BarrierShiftCoupling:
    if not a > 0.0 or eps < 0.0:
        raise ValueError("need a > 0 and eps >= 0")
    u1, u2, dl, dr, ilc, irc, ilj, irj = _kernels.coupled_barrier_kernel(
        path.times, path.cont, path.jump, x, a, eps, path.drift, _is_bv(path)
    )
    return BarrierShiftCoupling(
        times=np.concatenate([[0.0], path.times]),
        surplus_lo=u1,
        surplus_hi=u2,
        dividend_gap=dl,
        injection_gap=dr,
        dividend_inc_cont=ilc,
        injection_inc_cont=irc,
        dividend_inc_jump=ilj,
        injection_inc_jump=irj,
        barrier=a,
        eps=eps,
        start=x,
    )


def coupled_initial_shift(
    path: SamplePath, x: float, eps: float, a: float
) -> InitialShiftCoupling:
    if not a > 0.0 or eps < 0.0:
        raise ValueError("need a > 0 and eps >= 0")
    u1, u2, dl, dr = _kernels.coupled_start_kernel(
        path.times, path.cont, path.jump, x, eps, a, path.drift, _is_bv(path)
    )
    return InitialShiftCoupling(
        times=np.concatenate([[0.0], path.times]),
        surplus_lo=u1,
        surplus_hi=u2,
        dividend_gap=dl,
        injection_gap=dr,
        barrier=a,
        eps=eps,
        start=x,
    )


def _phases(c: BarrierShiftCoupling):
    """Phase structure of the barrier-a system.

    Returns (labels, cycle_starts): labels[i] is +1 when every regulator
    event in row i belongs to a dividend phase, -1 for an injection phase,
    0 when the row mixes phases or precedes the first dividend.  A boundary
    event starts its new phase at its own row.  cycle_starts are the rows
    whose events open a new dividend phase."""
    lc, rc = c.dividend_inc_cont, c.injection_inc_cont
    lj, rj = c.dividend_inc_jump, c.injection_inc_jump
    n = lc.size
    lab = np.zeros(n, dtype=np.int8)
    cycle_starts = []
    state = 0
    for i in range(n):
        before = state
        opened = False
        # the continuous step settles before the jump lands
        for l_inc, r_inc in ((lc[i], rc[i]), (lj[i], rj[i])):
            if l_inc > 0.0 and state != 1:
                state = 1
                opened = True
            if r_inc > 0.0 and state == 1:
                state = -1
        if opened:
            cycle_starts.append(i)
        had_l = lc[i] > 0.0 or lj[i] > 0.0
        had_r = rc[i] > 0.0 or rj[i] > 0.0
        if state == 1 and not had_r and (had_l or before == 1):
            lab[i] = 1
        elif state == -1 and not had_l and (had_r or before == -1):
            lab[i] = -1
        # else mixed or pre-dividend: left unlabeled
    return lab, np.asarray(cycle_starts, dtype=np.int64)


def barrier_coupling_violations(c: BarrierShiftCoupling) -> dict:
    """Worst-case violations of the pathwise barrier-shift orderings; every
    entry is <= 0 up to roundoff when the orderings hold."""
    eps = c.eps
    du = c.surplus_hi - c.surplus_lo
    out = {}
    out["surplus_gap_band"] = max(float(np.max(-du)), float(np.max(du - eps)))
    out["injection_gap_monotone"] = float(np.max(-np.diff(c.injection_gap), initial=0.0))
    out["dividend_gap_monotone"] = float(np.max(-np.diff(c.dividend_gap), initial=0.0))
    lab, starts = _phases(c)
    ddu = np.diff(du)
    inc_lab = lab[1:]
    div_steps = ddu[inc_lab == 1]
    inj_steps = ddu[inc_lab == -1]
    out["surplus_gap_up_in_dividend"] = float(np.max(-div_steps, initial=0.0))
    out["surplus_gap_down_in_injection"] = float(np.max(inj_steps, initial=0.0))
    # dividend-gap growth within one cycle is at most eps
    worst = 0.0
    for k in range(starts.size):
        s = starts[k]
        e = starts[k + 1] if k + 1 < starts.size else lab.size
        base = c.dividend_gap[s - 1] if s > 0 else 0.0
        worst = max(worst, float(c.dividend_gap[e - 1] - base) - eps)
    out["dividend_gap_cycle_band"] = worst
    return out


def start_coupling_violations(c: InitialShiftCoupling) -> dict:
    eps = c.eps
    dl, dr = c.dividend_gap, c.injection_gap
    du = eps - dl - dr
    out = {}
    out["dividend_gap_band"] = max(float(np.max(-dl)), float(np.max(dl - eps)))
    out["injection_gap_band"] = max(float(np.max(-dr)), float(np.max(dr - eps)))
    out["dividend_gap_monotone"] = float(np.max(-np.diff(dl), initial=0.0))
    out["injection_gap_monotone"] = float(np.max(-np.diff(dr), initial=0.0))
    out["surplus_gap_band"] = max(float(np.max(-du)), float(np.max(du - eps)))
    out["surplus_gap_matches_state"] = float(
        np.max(np.abs((c.surplus_hi - c.surplus_lo) - du))
    )
    out["surplus_gap_monotone_down"] = float(np.max(np.diff(du), initial=0.0))
    # once the two states coincide they never separate and the controls match
    state_gap = c.surplus_hi - c.surplus_lo
    merged = np.flatnonzero(state_gap == 0.0)
    if merged.size:
        k = merged[0]
        out["merge_is_absorbing"] = max(
            float(np.max(np.abs(state_gap[k:]), initial=0.0)),
            float(np.max(np.abs(np.diff(dl[k:])), initial=0.0)),
            float(np.max(np.abs(np.diff(dr[k:])), initial=0.0)),
        )
    else:
        out["merge_is_absorbing"] = 0.0
    return out
