"""Monte Carlo valuation under barrier controls.

All estimators share the path law through (seed, path_index) streams, so any
two runs with the same spec see identical paths: differences across barrier
levels or starting points are genuine common-random-number comparisons, and
pathwise monotonicity in those arguments survives estimation.

Exit-style estimators generate Gaussian rows lazily in grid-aligned blocks
and stop at the first exit; the block schedule reproduces the full-horizon
row sequence bit for bit, so laziness never changes a result.  Results are
reduced from per-path arrays indexed by path, making estimates independent
of the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .models import LevyModel, ProblemParams, linear_drift, validate_model
from .paths import _BRIDGE, _GAUSS, PathSpec, _path_arrays, _sample_jumps, _stream
from .reflect import ControlledTrajectory

__all__ = [
    "MCEstimate",
    "NPVEstimate",
    "ExitLaplace",
    "default_horizon",
    "discounted_integral",
    "estimate_npv",
    "npv_table",
    "exit_laplace",
    "drawdown_laplace",
    "first_dividend_laplace",
    "npv_fd_barrier",
    "npv_fd_start",
]

_TAIL_FRAC = 0.25  # final fraction of the horizon used for truncation bounds
_BLOCK_TIME = 4.0  # target duration of lazily generated row blocks


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n_paths: int
    truncation_bound: float

    def record(self, name: str, seed: int | None = None) -> dict:
        out = {
            "name": name,
            "mean": self.mean,
            "stderr": self.stderr,
            "n_paths": self.n_paths,
            "truncation_bound": self.truncation_bound,
        }
        if seed is not None:
            out["seed"] = seed
        return out


@dataclass(frozen=True)
class NPVEstimate:
    dividends: MCEstimate
    injections: MCEstimate
    value: MCEstimate
    barrier: float
    start: float


@dataclass(frozen=True)
class ExitLaplace:
    up: MCEstimate  # E[e^{-q tau_a} ; exit above]
    down: MCEstimate  # E[e^{-q tau_0} ; exit below]
    barrier: float
    start: float


def default_horizon(params: ProblemParams, eps: float = 1e-6) -> float:
    """Horizon with discount weight eps left beyond it."""
    return math.log(1.0 / eps) / params.discount


def _est(samples: np.ndarray, bound: float) -> MCEstimate:
    n = samples.size
    mean = float(np.mean(samples))
    sd = float(np.std(samples, ddof=1)) if n > 1 else 0.0
    return MCEstimate(mean=mean, stderr=sd / math.sqrt(n), n_paths=n, truncation_bound=bound)


def discounted_integral(traj: ControlledTrajectory, q: float, component: str = "dividends") -> float:
    """int e^{-q t} dL over the trajectory, the time-0 atom at weight 1.

    Atomic increments discount at their row time; the remainder of each row's
    increment is treated as accrued at constant rate over the preceding
    interval, which is exact for bounded-variation trajectories."""
    if component == "dividends":
        cum, atoms = traj.dividends, traj.dividend_atoms
    elif component == "injections":
        cum, atoms = traj.injections, traj.injection_atoms
    else:
        raise ValueError("component must be 'dividends' or 'injections'")
    t = traj.times
    disc = np.exp(-q * t)
    out = float(atoms[0])
    inc = np.diff(cum)
    lin = inc - atoms[1:]
    out += float(np.sum(atoms[1:] * disc[1:]))
    dt = np.diff(t)
    active = lin > 0.0
    if np.any(active):
        w = (disc[:-1][active] - disc[1:][active]) / (q * dt[active])
        out += float(np.sum(lin[active] * w))
    return out


class _PathGen:
    """Row arrays for one path, produced in grid-aligned blocks.

    Concatenated blocks equal the full-path row arrays exactly: block edges
    sit on absolute grid points, and the Gaussian and bridge streams are
    consumed in row order across blocks."""

    def __init__(self, model: LevyModel, spec: PathSpec, bridge: bool):
        self.d = linear_drift(model)
        self.sigma = model.sigma
        self.is_bv = model.sigma == 0.0
        self.T = spec.horizon
        self.h = spec.grid_step
        self.jt, self.js = _sample_jumps(model, spec)
        self._gauss = None if self.is_bv else _stream(spec.seed, spec.path_index, _GAUSS)
        self._bridge = _stream(spec.seed, spec.path_index, _BRIDGE) if bridge else None
        if self.is_bv:
            self._edges = [0.0, self.T]
        else:
            m = max(1, int(math.ceil(_BLOCK_TIME / self.h)))
            ng = int(math.floor(self.T / self.h))
            edges = [0.0]
            k = m
            while k <= ng and k * self.h < self.T:
                edges.append(k * self.h)
                k += m
            edges.append(self.T)
            self._edges = edges
        self.n_blocks = len(self._edges) - 1

    def block(self, k: int):
        t0, t1 = self._edges[k], self._edges[k + 1]
        lo = np.searchsorted(self.jt, t0, side="right")
        hi = np.searchsorted(self.jt, t1, side="right")
        jt = self.jt[lo:hi]
        if self.is_bv:
            times = np.unique(np.concatenate([jt, [t1]]))
        else:
            g0 = int(math.floor(t0 / self.h)) + 1
            g1 = int(math.floor(t1 / self.h))
            grid = self.h * np.arange(g0, g1 + 1)
            times = np.unique(np.concatenate([grid, jt, [t1]]))
            times = times[times > t0]
        jump = np.zeros(times.size)
        if jt.size:
            np.add.at(jump, np.searchsorted(times, jt), self.js[lo:hi])
        dt = np.diff(times, prepend=t0)
        cont = self.d * dt
        if not self.is_bv:
            z = self._gauss.standard_normal(times.size)
            cont = cont + self.sigma * np.sqrt(dt) * z
        bru = self._bridge.random(times.size) if self._bridge is not None else np.empty(0)
        return times, cont, jump, bru


def _parallel(n_paths: int, fn, n_workers: int):
    if n_workers <= 1:
        for i in range(n_paths):
            fn(i)
        return
    chunks = np.array_split(np.arange(n_paths), n_workers * 4)

    def run(chunk):
        for i in chunk:
            fn(int(i))

    with ThreadPoolExecutor(max_workers=n_workers) as ex:
        list(ex.map(run, chunks))


def _check_common(model, params, spec):
    validate_model(model)
    if not isinstance(params, ProblemParams):
        raise TypeError("params must be ProblemParams")
    if not isinstance(spec, PathSpec):
        raise TypeError("spec must be PathSpec")


def npv_samples(
    model: LevyModel,
    params: ProblemParams,
    xs,
    barriers,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
):
    """Per-path discounted regulator totals on shared paths.

    Returns (vl, vr, tl, tr), each shaped (n_barriers, n_starts, n_paths):
    discounted dividends, discounted injections, and undiscounted tail-window
    masses of each regulator.  Barrier 0 selects the pay-everything policy
    and is allowed for bounded variation only."""
    _check_common(model, params, spec)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    barriers = np.atleast_1d(np.asarray(barriers, dtype=float))
    is_bv = model.sigma == 0.0
    for a in barriers:
        if a < 0.0 or (a == 0.0 and not is_bv):
            raise ValueError("barriers must be positive (0 only for sigma = 0)")
    q = params.discount
    T = spec.horizon
    tail_t0 = T * (1.0 - _TAIL_FRAC)
    na, nx = barriers.size, xs.size
    vl = np.empty((na, nx, n_paths))
    vr = np.empty((na, nx, n_paths))
    tl = np.empty((na, nx, n_paths))
    tr = np.empty((na, nx, n_paths))
    d = linear_drift(model)

    def one(i):
        times, cont, jump, _ = _path_arrays(model, replace(spec, path_index=spec.path_index + i))
        for ai, a in enumerate(barriers):
            for xi, x in enumerate(xs):
                if a == 0.0:
                    out = _kernels.zero_policy_npv(times, cont, jump, x, d, q, T, tail_t0)
                else:
                    out = _kernels.npv_kernel(times, cont, jump, x, a, d, is_bv, q, tail_t0)
                vl[ai, xi, i], vr[ai, xi, i], tl[ai, xi, i], tr[ai, xi, i] = out

    _parallel(n_paths, one, n_workers)
    return vl, vr, tl, tr


def _npv_bounds(params, T, tl, tr):
    # geometric tail sum bounded by the stationary-window regulator rate;
    # factor 2 covers pre-stationary undershoot of that rate estimate
    q = params.discount
    disc_T = math.exp(-q * T)
    win = T * _TAIL_FRAC
    bl = 2.0 * disc_T * float(np.mean(tl)) / (win * q)
    br = 2.0 * disc_T * float(np.mean(tr)) / (win * q)
    return bl, br


def npv_table(
    model: LevyModel,
    params: ProblemParams,
    xs,
    barriers,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
):
    """Discounted dividend/injection totals for every (barrier, start) pair
    on shared paths.  Returns dict with (na, nx) object arrays 'dividends',
    'injections', 'value'."""
    vl, vr, tl, tr = npv_samples(model, params, xs, barriers, n_paths, spec, n_workers)
    na, nx = vl.shape[0], vl.shape[1]
    beta = params.injection_cost
    div = np.empty((na, nx), dtype=object)
    inj = np.empty((na, nx), dtype=object)
    val = np.empty((na, nx), dtype=object)
    for ai in range(na):
        for xi in range(nx):
            bl, br = _npv_bounds(params, spec.horizon, tl[ai, xi], tr[ai, xi])
            div[ai, xi] = _est(vl[ai, xi], bl)
            inj[ai, xi] = _est(vr[ai, xi], br)
            val[ai, xi] = _est(vl[ai, xi] - beta * vr[ai, xi], bl + beta * br)
    return {"dividends": div, "injections": inj, "value": val}


def estimate_npv(
    model: LevyModel,
    params: ProblemParams,
    x: float,
    a: float,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
) -> NPVEstimate:
    """Value of the double-barrier control at barrier a from start x."""
    t = npv_table(model, params, [x], [a], n_paths, spec, n_workers)
    return NPVEstimate(
        dividends=t["dividends"][0, 0],
        injections=t["injections"][0, 0],
        value=t["value"][0, 0],
        barrier=float(a),
        start=float(x),
    )


def _scan_first_passage(model, spec, n_paths, n_workers, starts, kernel_call, trivial):
    """Shared driver: lazily generated blocks, one scan state per start value.

    kernel_call(rows, state, si) -> (time, hit, new_state); trivial(si) gives
    an immediate result (time 0) or None."""
    ns = len(starts)
    tval = np.full((ns, n_paths), -1.0)
    side = np.zeros((ns, n_paths), dtype=np.int8)

    def one(i):
        sp = replace(spec, path_index=spec.path_index + i)
        done = np.zeros(ns, dtype=bool)
        state = np.empty(ns)
        for si in range(ns):
            res = trivial(si)
            if res is not None:
                tval[si, i], side[si, i] = 0.0, res
                done[si] = True
            else:
                state[si] = starts[si] if np.isfinite(starts[si]) else 0.0
        if np.all(done):
            return
        gen = _PathGen(model, sp, bridge=model.sigma > 0.0)
        tp = 0.0
        for k in range(gen.n_blocks):
            rows = gen.block(k)
            for si in range(ns):
                if done[si]:
                    continue
                t, h, u_end = kernel_call(rows, state[si], tp, si)
                if h != 0:
                    tval[si, i], side[si, i] = t, h
                    done[si] = True
                else:
                    state[si] = u_end
            if np.all(done):
                break
            tp = rows[0][-1]

    _parallel(n_paths, one, n_workers)
    return tval, side


def exit_laplace(
    model: LevyModel,
    params: ProblemParams,
    x,
    a: float,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
):
    """Two-sided first-exit transforms of the free surplus from [0, a]:
    up = E_x[e^{-q tau+}; up before down], down likewise.  Vector x shares
    one set of paths.  Returns ExitLaplace (or a list for vector x)."""
    _check_common(model, params, spec)
    if not a > 0.0:
        raise ValueError("barrier must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0.0) or np.any(xs > a):
        raise ValueError("starts must lie in [0, a]")
    d = linear_drift(model)
    is_bv = model.sigma == 0.0
    sig = model.sigma
    q = params.discount

    def trivial(si):
        x0 = xs[si]
        if x0 == a and (sig > 0.0 or (is_bv and d > 0.0)):
            return 1
        if x0 == 0.0 and (sig > 0.0 or (is_bv and d < 0.0)):
            return -1
        return None

    def call(rows, u0, tp, si):
        times, cont, jump, bru = rows
        return _kernels.exit_kernel(times, cont, jump, bru, u0, tp, a, sig, d, is_bv)

    tval, side = _scan_first_passage(model, spec, n_paths, n_workers, xs, call, trivial)
    disc_T = math.exp(-q * spec.horizon)
    out = []
    for si in range(xs.size):
        cens = float(np.mean(side[si] == 0))
        up = np.where(side[si] == 1, np.exp(-q * np.maximum(tval[si], 0.0)), 0.0)
        dn = np.where(side[si] == -1, np.exp(-q * np.maximum(tval[si], 0.0)), 0.0)
        out.append(
            ExitLaplace(
                up=_est(up, disc_T * cens),
                down=_est(dn, disc_T * cens),
                barrier=a,
                start=float(xs[si]),
            )
        )
    return out[0] if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def drawdown_laplace(
    model: LevyModel,
    params: ProblemParams,
    a,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
):
    """E[e^{-q kappa}] where kappa is the first passage below 0 of the
    surplus reflected from above at a, started at a.  Vector a shares paths
    (the couplings make the estimate pathwise monotone in a)."""
    _check_common(model, params, spec)
    bars = np.atleast_1d(np.asarray(a, dtype=float))
    if np.any(bars <= 0.0):
        raise ValueError("barriers must be positive")
    d = linear_drift(model)
    is_bv = model.sigma == 0.0
    sig = model.sigma
    q = params.discount

    def trivial(si):
        return None

    def call(rows, y0, tp, si):
        times, cont, jump, bru = rows
        return _kernels.drawdown_kernel(times, cont, jump, bru, y0, tp, bars[si], sig, d, is_bv)

    tval, side = _scan_first_passage(model, spec, n_paths, n_workers, bars, call, trivial)
    disc_T = math.exp(-q * spec.horizon)
    out = []
    for si in range(bars.size):
        cens = float(np.mean(side[si] == 0))
        val = np.where(side[si] != 0, np.exp(-q * np.maximum(tval[si], 0.0)), 0.0)
        out.append(_est(val, disc_T * cens))
    return out[0] if np.isscalar(a) or np.asarray(a).ndim == 0 else out


def first_dividend_laplace(
    model: LevyModel,
    params: ProblemParams,
    x,
    a: float,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
):
    """E_x[e^{-q rho}] where rho is the first increase time of the upper
    regulator under the double-barrier control at a.  x above a gives 1
    (the time-0 lump is a dividend)."""
    _check_common(model, params, spec)
    if not a > 0.0:
        raise ValueError("barrier must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    d = linear_drift(model)
    is_bv = model.sigma == 0.0
    sig = model.sigma
    q = params.discount

    def trivial(si):
        x0 = xs[si]
        if x0 > a:
            return 1
        if x0 == a and (sig > 0.0 or (is_bv and d > 0.0)):
            return 1
        return None

    def call(rows, u0, tp, si):
        times, cont, jump, bru = rows
        u0c = min(max(u0, 0.0), a)
        return _kernels.first_dividend_kernel(
            times, cont, jump, bru, u0c, tp, a, sig, d, is_bv
        )

    tval, side = _scan_first_passage(model, spec, n_paths, n_workers, xs, call, trivial)
    disc_T = math.exp(-q * spec.horizon)
    out = []
    for si in range(xs.size):
        cens = float(np.mean(side[si] == 0))
        val = np.where(side[si] != 0, np.exp(-q * np.maximum(tval[si], 0.0)), 0.0)
        out.append(_est(val, disc_T * cens))
    return out[0] if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def npv_fd_barrier(
    model: LevyModel,
    params: ProblemParams,
    x: float,
    a: float,
    eps: float,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
    richardson: bool = True,
) -> MCEstimate:
    """Right difference of the total value in the barrier level, combined
    pathwise before averaging (common random numbers).  With richardson=True
    each path contributes 2 f_i(eps/2) - f_i(eps) where f_i(e) is the right
    difference quotient at step e, cancelling the leading O(eps) bias."""
    bars = [a, a + 0.5 * eps, a + eps] if richardson else [a, a + eps]
    vl, vr, tl, tr = npv_samples(model, params, [x], bars, n_paths, spec, n_workers)
    beta = params.injection_cost
    v = vl[:, 0, :] - beta * vr[:, 0, :]
    if richardson:
        f_half = (v[1] - v[0]) / (0.5 * eps)
        f_full = (v[2] - v[0]) / eps
        samples = 2.0 * f_half - f_full
    else:
        samples = (v[1] - v[0]) / eps
    bl, br = _npv_bounds(params, spec.horizon, tl[0, 0], tr[0, 0])
    return _est(samples, 2.0 * (bl + beta * br) / eps)


def npv_fd_start(
    model: LevyModel,
    params: ProblemParams,
    x: float,
    a: float,
    eps: float,
    n_paths: int,
    spec: PathSpec,
    n_workers: int = 1,
) -> MCEstimate:
    """Central difference of the total value in the starting point, combined
    pathwise before averaging."""
    if not 0.0 <= x - eps or not x + eps <= a or eps <= 0.0:
        raise ValueError("need 0 <= x - eps and x + eps <= a")
    vl, vr, tl, tr = npv_samples(model, params, [x - eps, x + eps], [a], n_paths, spec, n_workers)
    beta = params.injection_cost
    v = vl[0] - beta * vr[0]
    samples = (v[1] - v[0]) / (2.0 * eps)
    bl, br = _npv_bounds(params, spec.horizon, tl[0, 0], tr[0, 0])
    return _est(samples, (bl + beta * br) / eps)
