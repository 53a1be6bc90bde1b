"""Barrier selection, derivative compositions, and barrier sweeps.

Everything here rides on the coupling built into the path engine: any two
estimates produced under the same path spec see identical paths, so
comparisons across barrier levels carry pathwise monotonicity and finite
differences keep their variance collapsed.  The drawdown transform estimated
on a shared path set is exactly non-increasing in the barrier, which turns
the selection problem into bisection on a monotone noisy-but-coupled curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mc import (
    ExitLaplace,
    MCEstimate,
    drawdown_laplace,
    first_dividend_laplace,
    npv_table,
)
from .models import LevyModel, ProblemParams
from .paths import PathSpec

__all__ = [
    "BarrierDerivative",
    "BarrierSelection",
    "BarrierCurve",
    "value_derivative_in_a",
    "value_derivative_in_x",
    "select_barrier",
    "barrier_sweep",
    "default_sweep_grid",
]


@dataclass(frozen=True)
class BarrierDerivative:
    """Right derivatives of the discounted totals in the barrier level,
    composed from the three one-number transforms."""

    dividends: MCEstimate  # d/da of the dividend total
    injections: MCEstimate  # d/da of the injection total (unweighted)
    value: MCEstimate  # d/da of dividends - beta * injections
    barrier_transform: float  # the drawdown-transform mean used in the composition


def _propagated(value: float, grads: list, inputs: list) -> MCEstimate:
    # independence approximation across the input estimates; the shared-path
    # correlations are negative for these functionals, so this overstates
    var = sum((g * e.stderr) ** 2 for g, e in zip(grads, inputs))
    bound = sum(abs(g) * e.truncation_bound for g, e in zip(grads, inputs))
    return MCEstimate(
        mean=float(value),
        stderr=float(math.sqrt(var)),
        n_paths=min(e.n_paths for e in inputs),
        truncation_bound=float(bound),
    )


def value_derivative_in_a(
    params: ProblemParams,
    nu: MCEstimate,
    nubar_x: MCEstimate,
    nubar_0: MCEstimate,
) -> BarrierDerivative:
    """Compose d/da of the two discounted totals from transform estimates.

    dL/da = -nubar_x / (1 - nu nubar_0), dR/da = nu dL/da, and the value
    derivative is dL/da (1 - beta nu).  The denominator is positive for any
    exact transforms; a nonpositive estimate means the inputs are too noisy
    to compose and raises rather than returning a sign-flipped derivative."""
    beta = params.injection_cost
    n, bx, b0 = nu.mean, nubar_x.mean, nubar_0.mean
    den = 1.0 - n * b0
    if den <= 0.0:
        raise RuntimeError(
            "estimation failure: 1 - nu nubar_0 = %.3e is not positive" % den
        )
    dvl = -bx / den
    dvr = dvl * n
    dv = dvl * (1.0 - beta * n)
    # partials in the order (nubar_x, nu, nubar_0)
    gl = [-1.0 / den, -bx * b0 / den**2, -bx * n / den**2]
    gr = [-n / den, -bx / den**2, -bx * n**2 / den**2]
    gv = [
        (1.0 - beta * n) * gl[0],
        (1.0 - beta * n) * gl[1] - beta * dvl,
        (1.0 - beta * n) * gl[2],
    ]
    inputs = [nubar_x, nu, nubar_0]
    return BarrierDerivative(
        dividends=_propagated(dvl, gl, inputs),
        injections=_propagated(dvr, gr, inputs),
        value=_propagated(dv, gv, inputs),
        barrier_transform=float(n),
    )


def value_derivative_in_x(
    params: ProblemParams, x: float, a: float, exit: ExitLaplace | None = None
) -> MCEstimate:
    """Slope of the barrier-a value in the starting point.

    Interior slope is up + beta * down from a two-sided exit estimate at the
    same (x, a); outside [0, a] the slope is the exact extension constant (1
    above, beta below) and consumes no paths."""
    beta = params.injection_cost
    if x > a:
        return MCEstimate(mean=1.0, stderr=0.0, n_paths=0, truncation_bound=0.0)
    if x < 0.0:
        return MCEstimate(mean=beta, stderr=0.0, n_paths=0, truncation_bound=0.0)
    if exit is None:
        raise ValueError("interior slope needs a two-sided exit estimate")
    if abs(exit.start - x) > 1e-12 or abs(exit.barrier - a) > 1e-12:
        raise ValueError("exit estimate was taken at a different (x, a)")
    up, dn = exit.up, exit.down
    var = up.stderr**2 + (beta * dn.stderr) ** 2
    return MCEstimate(
        mean=float(up.mean + beta * dn.mean),
        stderr=float(math.sqrt(var)),
        n_paths=min(up.n_paths, dn.n_paths),
        truncation_bound=float(up.truncation_bound + beta * dn.truncation_bound),
    )


@dataclass(frozen=True)
class BarrierSelection:
    """Crossing point of beta * (drawdown transform) through 1.

    The point estimate interpolates the crossing inside [bracket_lo,
    bracket_hi]; `certified` records the two endpoint inequalities at three
    standard errors; `converged` records whether the bracket reached the
    requested width before the path budget ran out.  `at_zero` marks the
    bounded-variation case where the transform already starts below the
    crossing and the barrier collapses to 0."""

    barrier: float
    bracket_lo: float
    bracket_hi: float
    nu_lo: MCEstimate
    nu_hi: MCEstimate
    certified: bool
    converged: bool
    at_zero: bool
    paths_used: int


def _crossing_index(beta, nus):
    # estimates share one path set, so the means are exactly non-increasing
    vals = beta * np.array([e.mean for e in nus])
    below = np.nonzero(vals < 1.0)[0]
    return int(below[0]) if below.size else None


def select_barrier(
    model: LevyModel,
    params: ProblemParams,
    tol_a: float,
    mc_budget: int,
    spec: PathSpec,
    n_workers: int = 1,
    a_max: float | None = None,
) -> BarrierSelection:
    """Locate the barrier where beta times the drawdown transform crosses 1.

    Runs a geometric scan and then repeated 9-point refinements, every sweep
    reusing one shared path set for all its barrier levels (the transform is
    then exactly monotone along each sweep, so the crossing interval is
    unambiguous).  mc_budget caps the total number of simulated paths summed
    over sweeps; when it runs out before the bracket reaches tol_a the
    achieved bracket is returned with converged=False rather than raising."""
    if not tol_a > 0.0:
        raise ValueError("tol_a must be positive")
    if mc_budget < 8:
        raise ValueError("mc_budget too small to run a single sweep")
    beta = params.injection_cost
    if beta <= 1.0:
        raise ValueError("injection cost factor must exceed 1")
    is_bv = model.sigma == 0.0
    per_run = max(mc_budget // 4, 2)
    paths_used = 0

    hi0 = a_max if a_max is not None else 32.0
    lo0 = min(max(tol_a / 2.0, hi0 / 4096.0), hi0 / 16.0)
    grid = np.geomspace(lo0, hi0, 25)
    while True:
        n_run = min(per_run, mc_budget - paths_used)
        if n_run < 2:
            raise RuntimeError("path budget exhausted before any bracket formed")
        nus = drawdown_laplace(model, params, grid, n_run, spec, n_workers)
        paths_used += n_run
        j = _crossing_index(beta, nus)
        if j is None:
            if a_max is not None or grid[-1] > 1e6:
                raise ValueError(
                    "beta * transform stays above 1 on the scan range; raise a_max"
                )
            grid = grid * 8.0
            continue
        if j == 0:
            lo, hi = 0.0, float(grid[0])
            nu_lo, nu_hi = nus[0], nus[0]
            if is_bv:
                # 0 is a genuine candidate: the transform starts below 1/beta
                return BarrierSelection(
                    barrier=0.0, bracket_lo=0.0, bracket_hi=hi,
                    nu_lo=nu_lo, nu_hi=nu_hi,
                    certified=beta * nu_hi.mean <= 1.0 + 3.0 * nu_hi.stderr,
                    converged=hi <= tol_a, at_zero=True, paths_used=paths_used,
                )
            # diffusion case: the transform tends to 1 at 0+, so the crossing
            # lies below the scan floor; report the floor as an upper bound
            return BarrierSelection(
                barrier=hi, bracket_lo=0.0, bracket_hi=hi,
                nu_lo=nu_lo, nu_hi=nu_hi, certified=False,
                converged=False, at_zero=False, paths_used=paths_used,
            )
        lo, hi = float(grid[j - 1]), float(grid[j])
        nu_lo, nu_hi = nus[j - 1], nus[j]
        break

    while hi - lo > tol_a and paths_used < mc_budget:
        n_run = min(per_run, mc_budget - paths_used)
        if n_run < 2:
            break
        sub = np.linspace(lo, hi, 9)
        nus = drawdown_laplace(model, params, sub, n_run, spec, n_workers)
        paths_used += n_run
        j = _crossing_index(beta, nus)
        if j is None or j == 0:
            # endpoint estimates moved across 1 under the fresh sweep's noise;
            # the previous bracket stands and tightening has stalled
            break
        lo, hi = float(sub[j - 1]), float(sub[j])
        nu_lo, nu_hi = nus[j - 1], nus[j]

    flo, fhi = beta * nu_lo.mean - 1.0, beta * nu_hi.mean - 1.0
    if flo > 0.0 > fhi:
        point = lo + (hi - lo) * flo / (flo - fhi)
    else:
        point = 0.5 * (lo + hi)
    certified = (
        beta * nu_hi.mean <= 1.0 + 3.0 * nu_hi.stderr
        and beta * nu_lo.mean >= 1.0 - 3.0 * nu_lo.stderr
    )
    return BarrierSelection(
        barrier=float(point), bracket_lo=lo, bracket_hi=hi,
        nu_lo=nu_lo, nu_hi=nu_hi, certified=certified,
        converged=hi - lo <= tol_a, at_zero=False, paths_used=paths_used,
    )


@dataclass(frozen=True)
class BarrierCurve:
    """Value, drawdown transform, and composed derivative along a barrier
    grid, all from shared paths at a fixed start."""

    grid: np.ndarray
    nu: list  # MCEstimate per barrier
    value: list  # MCEstimate of dividends - beta * injections per barrier
    derivative: list  # BarrierDerivative per barrier
    start: float

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0 or np.any(np.diff(g) <= 0.0):
            raise ValueError("barrier grid must be strictly increasing")
        for k in range(g.size - 1):
            a, b = self.nu[k], self.nu[k + 1]
            if b.mean > a.mean + 3.0 * (a.stderr + b.stderr):
                raise ValueError("drawdown transform increased along the grid")

    @property
    def argmax(self) -> int:
        return int(np.argmax([e.mean for e in self.value]))

    def to_csv(self, path) -> None:
        data = np.column_stack(
            [
                self.grid,
                [e.mean for e in self.nu],
                [e.stderr for e in self.nu],
                [e.mean for e in self.value],
                [e.stderr for e in self.value],
                [d.value.mean for d in self.derivative],
            ]
        )
        np.savetxt(
            path,
            data,
            delimiter=",",
            header="a,nu_mean,nu_stderr,V_mean,V_stderr,dV",
            comments="",
        )


def default_sweep_grid(barrier: float, n: int = 12) -> np.ndarray:
    """Geometric grid over barrier/8 .. 8*barrier, where the curvature is."""
    if not barrier > 0.0:
        raise ValueError("need a positive center barrier")
    return np.geomspace(barrier / 8.0, 8.0 * barrier, n)


def barrier_sweep(
    model: LevyModel,
    params: ProblemParams,
    x: float,
    grid,
    mc_budget: int,
    spec: PathSpec,
    n_workers: int = 1,
) -> BarrierCurve:
    """Estimate value, drawdown transform, and composed derivative on a
    barrier grid from the start x.

    The budget is split evenly across the component sweeps (one value sweep,
    one transform sweep, and one first-dividend sweep per grid point); every
    sweep draws its paths from the same spec, so all columns are coupled."""
    g = np.asarray(grid, dtype=float)
    if g.size == 0 or np.any(np.diff(g) <= 0.0):
        raise ValueError("barrier grid must be strictly increasing")
    m = g.size
    n_run = mc_budget // (2 + m)
    if n_run < 2:
        raise ValueError("mc_budget too small for the grid")
    table = npv_table(model, params, [x], g, n_run, spec, n_workers)
    values = [table["value"][k, 0] for k in range(m)]
    nus = drawdown_laplace(model, params, g, n_run, spec, n_workers)
    derivs = []
    for k, a in enumerate(g):
        fd = first_dividend_laplace(model, params, [x, 0.0], float(a), n_run, spec, n_workers)
        derivs.append(value_derivative_in_a(params, nus[k], fd[0], fd[1]))
    return BarrierCurve(grid=g, nu=nus, value=values, derivative=derivs, start=float(x))
