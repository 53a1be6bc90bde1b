"""Experiment orchestration.

Each experiment function turns one ExperimentConfig into report rows (built
by report.check and friends) plus plot-ready curve tables.  Pathwise checks
carry a 1e-12 accumulation tolerance; statistical checks carry 3-stderr dead
bands plus any horizon-truncation bound.  With a few dozen 3-sigma checks
per full run, an occasional borderline failure is expected once in a few
hundred runs; rerun with a fresh seed before treating one as real.

Every row names the claim it tests through the CLAIMS registry below, which
is the single place claim labels live.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .barrier import barrier_sweep, default_sweep_grid, select_barrier, value_derivative_in_a, value_derivative_in_x
from .config import ExperimentConfig
from .fleet import FLEET
from .mc import (
    _npv_bounds,
    default_horizon,
    drawdown_laplace,
    exit_laplace,
    first_dividend_laplace,
    npv_fd_start,
    npv_samples,
)
from .models import LevyModel
from .paths import PathSpec, simulate_path
from .reflect import (
    barrier_coupling_violations,
    coupled_barrier_shift,
    coupled_initial_shift,
    start_coupling_violations,
)
from .report import band_check, check, margin_check
from .scale import (
    analytic_optimal_barrier,
    analytic_value_profile,
    exit_up_identity,
    generator_residual,
    resolvent_functional,
    scale_function,
    solve_phibar_fixed_point,
)
from .strategies import double_barrier, hysteresis, periodic_review, tournament

__all__ = ["CLAIMS", "EXPERIMENT_FUNCS", "run_experiment", "claims_covered"]

# The one place claim labels live: every report row cites its entry here.
CLAIMS = {
    "coupling-barrier-ubv": "couplings (A.8)/(A.9)",
    "coupling-start-ubv": "couplings (A.15)/(A.16)",
    "coupling-barrier-bv": "couplings (C.9)/(C.10)",
    "coupling-start-bv": "couplings (C.19)/(C.20)",
    "scale-definition": "identity (6.1)",
    "exit-ratio": "identity (6.1)",
    "occupation-resolvent": "identity (6.2)",
    "fixed-point": "fixed point (6.3)-(6.5)",
    "horizon-stability": "Lemma 3.2/3.3",
    "barrier-derivative": "Lemma 4.2",
    "injection-ratio": "Lemma 4.3",
    "selection-certificate": "Lemma 4.3",
    "value-slope": "Lemma 5.3",
    "slope-bounds": "Lemma 5.5 (5.18)",
    "slope-limit": "Lemma 5.5 (5.19)",
    "dominance": "Lemma 4.1",
    "dv-sign-flip": "Lemma 4.1",
    "generator-interior": "Lemma 5.7 (5.30)",
    "generator-above": "Lemma 5.8 (5.33)",
    "generator-control": "Lemma 5.8 (5.33)",
    "tournament-dominance": "Theorem 5.1 (necessary-condition evidence)",
    "tournament-refinement": "Theorem 5.1 (necessary-condition evidence)",
}

# fixed seed offsets keep experiment sections on disjoint path sets while
# estimates within a section stay coupled
_OFF_COUPLINGS = 1
_OFF_ORACLE = 2
_OFF_DERIV = 3
_OFF_SELECT = 4
_OFF_DOMINANCE = 5
_OFF_SWEEP = 6
_OFF_HORIZON = 7
_OFF_TOURNAMENT = 8
_OFF_ANCHOR = 9


def _horizon(cfg: ExperimentConfig) -> float:
    return cfg.run.horizon if cfg.run.horizon is not None else default_horizon(cfg.params)


def _spec(cfg: ExperimentConfig, offset: int, horizon=None, grid_step=None) -> PathSpec:
    return PathSpec(
        horizon=horizon if horizon is not None else _horizon(cfg),
        grid_step=grid_step if grid_step is not None else cfg.run.grid_step,
        seed=cfg.run.seed + offset,
        path_index=0,
    )


def _anchor(cfg: ExperimentConfig) -> float:
    """Barrier scale for grids and probe points; never an oracle."""
    entry = FLEET.get(cfg.model_name)
    if entry is not None:
        return entry.barrier_anchor
    sel = select_barrier(
        cfg.model,
        cfg.params,
        tol_a=max(cfg.run.tol_a, 0.05),
        mc_budget=min(cfg.run.mc_budget, 20_000),
        spec=_spec(cfg, _OFF_ANCHOR),
        n_workers=cfg.run.n_workers,
    )
    return max(sel.barrier, sel.bracket_hi)


def _oracle_route(model: LevyModel) -> str:
    j = model.jumps
    if j is None or j.rate_pos == 0.0:
        return "direct"
    if model.sigma > 0.0:
        return "fixed_point"
    return "none"


# ------------------------------------------------------------------ couplings


def _coupling_rows(model, tag, n_paths, spec):
    is_bv = model.sigma == 0.0
    fam_b = "coupling-barrier-bv" if is_bv else "coupling-barrier-ubv"
    fam_s = "coupling-start-bv" if is_bv else "coupling-start-ubv"
    x, a, eps = 0.6, 1.0, 0.25
    worst_b: dict = {}
    worst_s: dict = {}
    for i in range(n_paths):
        p = simulate_path(model, replace(spec, path_index=spec.path_index + i))
        for k, v in barrier_coupling_violations(coupled_barrier_shift(p, x, a, eps)).items():
            worst_b[k] = max(worst_b.get(k, -math.inf), v)
        for k, v in start_coupling_violations(coupled_initial_shift(p, x, eps, a)).items():
            worst_s[k] = max(worst_s.get(k, -math.inf), v)
    rows = []
    for k in sorted(worst_b):
        rows.append(
            band_check("couplings/%s/barrier-shift/%s" % (tag, k), CLAIMS[fam_b], worst_b[k], 1e-12)
        )
    for k in sorted(worst_s):
        rows.append(
            band_check("couplings/%s/start-shift/%s" % (tag, k), CLAIMS[fam_s], worst_s[k], 1e-12)
        )
    return rows


def exp_couplings(cfg: ExperimentConfig):
    """Pathwise regulator orderings under barrier and start shifts.

    Runs the config model plus a stock companion of the other variation
    class, so one full run exercises both appendix families."""
    n = min(cfg.run.n_paths, 1000)
    spec = _spec(cfg, _OFF_COUPLINGS, horizon=16.0)
    checks = _coupling_rows(cfg.model, cfg.model_name, n, spec)
    comp = FLEET["F1"] if cfg.model.sigma == 0.0 else FLEET["F2"]
    checks += _coupling_rows(comp.model, comp.name, min(n, 200), spec)
    return checks, {}


# ---------------------------------------------------------------- oracle_xval


def exp_oracle_xval(cfg: ExperimentConfig):
    """Monte Carlo first-passage transforms against the analytic routes, and
    horizon-doubling stability of the injection totals."""
    model, params, run = cfg.model, cfg.params, cfg.run
    q = params.discount
    a_ref = _anchor(cfg)
    spec = _spec(cfg, _OFF_ORACLE)
    route = _oracle_route(model)
    checks = []
    curves = {}

    if route == "direct":
        table = scale_function(model, q, x_max=max(2.0 * a_ref, a_ref + 1.0))
        checks.append(
            band_check("oracle/scale-definition", CLAIMS["scale-definition"], table.definition_check(), 1e-6)
        )
        xs = a_ref * np.array([0.15, 0.35, 0.5, 0.65, 0.85])
        ests = exit_laplace(model, params, xs, a_ref, run.n_paths, spec, run.n_workers)
        for x, e in zip(xs, ests):
            want = exit_up_identity(table, float(x), a_ref)
            checks.append(
                band_check(
                    "oracle/exit-ratio-x%.3f" % x,
                    CLAIMS["exit-ratio"],
                    abs(e.up.mean - want),
                    3.0 * e.up.stderr + e.up.truncation_bound,
                    stderr=e.up.stderr,
                )
            )
        mid = ests[2]
        occ = (1.0 - mid.up.mean - mid.down.mean) / q
        occ_se = math.hypot(mid.up.stderr, mid.down.stderr) / q
        want = resolvent_functional(table, float(xs[2]), a_ref, lambda y: 1.0)
        checks.append(
            band_check(
                "oracle/occupation-resolvent",
                CLAIMS["occupation-resolvent"],
                abs(occ - want),
                3.0 * occ_se + (mid.up.truncation_bound + mid.down.truncation_bound) / q,
                stderr=occ_se,
            )
        )
        # no positive jumps: the fixed point collapses to the ratio exactly
        pb = solve_phibar_fixed_point(model, q, a_ref)
        gap = float(np.max(np.abs(pb.values - table.w(pb.grid) / table.w(a_ref))))
        checks.append(band_check("oracle/fixed-point-r0-collapse", CLAIMS["fixed-point"], gap, 1e-12))
    elif route == "fixed_point":
        j = model.jumps
        r = j.rate_pos
        pb = solve_phibar_fixed_point(model, q, a_ref)
        checks.append(
            band_check(
                "oracle/fixed-point-contraction",
                CLAIMS["fixed-point"],
                pb.contraction_rate,
                r / (q + r) + 0.05,
            )
        )
        xs = a_ref * np.array([0.15, 0.35, 0.5, 0.65, 0.85])
        ests = exit_laplace(model, params, xs, a_ref, run.n_paths, spec, run.n_workers)
        for x, e in zip(xs, ests):
            want = pb(float(x))
            checks.append(
                band_check(
                    "oracle/fixed-point-x%.3f" % x,
                    CLAIMS["fixed-point"],
                    abs(e.up.mean - want),
                    3.0 * e.up.stderr + e.up.truncation_bound,
                    stderr=e.up.stderr,
                )
            )
        curves["phibar_fixed_point"] = (
            "x,phibar",
            np.column_stack([pb.grid, pb.values]),
        )
        checks.append(
            check("oracle/exit-ratio", CLAIMS["exit-ratio"], "inconclusive")
        )
        checks.append(
            check("oracle/occupation-resolvent", CLAIMS["occupation-resolvent"], "inconclusive")
        )
    else:
        for name, fam in (
            ("oracle/exit-ratio", "exit-ratio"),
            ("oracle/occupation-resolvent", "occupation-resolvent"),
            ("oracle/fixed-point", "fixed-point"),
        ):
            checks.append(check(name, CLAIMS[fam], "inconclusive"))

    # horizon-doubling stability of the injection totals (admissibility)
    T = _horizon(cfg)
    n_h = min(run.n_paths, 4000)
    cases = [("pi-a", 0.6 * a_ref, a_ref)]
    if model.sigma == 0.0:
        cases.append(("pi-0", 0.4 * a_ref, 0.0))
    for tag, x_h, a_h in cases:
        s1 = _spec(cfg, _OFF_HORIZON, horizon=T)
        s2 = _spec(cfg, _OFF_HORIZON, horizon=2.0 * T)
        _, vr1, tl1, tr1 = npv_samples(model, params, [x_h], [a_h], n_h, s1, run.n_workers)
        _, vr2, _, _ = npv_samples(model, params, [x_h], [a_h], n_h, s2, run.n_workers)
        gap = vr2[0, 0] - vr1[0, 0]
        se = float(np.std(gap, ddof=1)) / math.sqrt(n_h)
        _, br = _npv_bounds(params, T, tl1[0, 0], tr1[0, 0])
        checks.append(
            band_check(
                "oracle/horizon-stability-%s" % tag,
                CLAIMS["horizon-stability"],
                abs(float(np.mean(gap))),
                br + 3.0 * se,
                stderr=se,
            )
        )
    return checks, curves


# ---------------------------------------------------------------- derivatives


def _deriv_gaps(model, params, run, a_ref, spec):
    """Signed comparison gaps (value, stderr, bound) at one grid step:
    composition-vs-FD per component and barrier level, the injection ratio,
    and the slope-vs-FD gaps."""
    n = run.n_paths
    barrier_rows = {}
    ratio_row = None
    for mult in (0.6, 1.0, 1.4):
        a = mult * a_ref
        x = 0.55 * a
        nu = drawdown_laplace(model, params, a, n, spec, run.n_workers)
        tr = first_dividend_laplace(model, params, [x, 0.0], a, n, spec, run.n_workers)
        comp = value_derivative_in_a(params, nu, tr[0], tr[1])
        # component right differences on shared paths, half-step refined
        eps = 0.05 * a
        bars = [a, a + 0.5 * eps, a + eps]
        vl, vr, tl_, tr_ = npv_samples(model, params, [x], bars, n, spec, run.n_workers)
        bl, br = _npv_bounds(params, spec.horizon, tl_[0, 0], tr_[0, 0])
        fd = {}
        for key, comp_est, samples, bound in (
            ("dividends", comp.dividends, vl[:, 0, :], bl),
            ("injections", comp.injections, vr[:, 0, :], br),
        ):
            quot = 2.0 * (samples[1] - samples[0]) / (0.5 * eps) - (samples[2] - samples[0]) / eps
            fd[key] = (float(np.mean(quot)), float(np.std(quot, ddof=1)) / math.sqrt(n))
            barrier_rows[(key, mult)] = (
                comp_est.mean - fd[key][0],
                math.hypot(comp_est.stderr, fd[key][1]),
                comp_est.truncation_bound + 2.0 * bound / eps,
            )
        if mult == 1.0:
            # the two component differences must sit in the drawdown ratio
            dl, dr = fd["dividends"], fd["injections"]
            ratio_row = (
                dr[0] - nu.mean * dl[0],
                math.sqrt(dr[1] ** 2 + (nu.mean * dl[1]) ** 2 + (dl[0] * nu.stderr) ** 2),
                nu.truncation_bound * abs(dl[0]),
            )

    slope_rows = {}
    xs = a_ref * np.array([0.15, 0.35, 0.5, 0.65, 0.85])
    ests = exit_laplace(model, params, xs, a_ref, n, spec, run.n_workers)
    for x, e in zip(xs, ests):
        slope = value_derivative_in_x(params, float(x), a_ref, e)
        eps_x = min(0.05 * a_ref, 0.45 * float(min(x, a_ref - x)))
        if eps_x > 0.0:
            fd = npv_fd_start(model, params, float(x), a_ref, eps_x, n, spec, run.n_workers)
            slope_rows[float(x)] = (
                slope.mean - fd.mean,
                math.hypot(slope.stderr, fd.stderr),
                slope.truncation_bound + fd.truncation_bound,
            )
    return barrier_rows, ratio_row, slope_rows


def _extrapolate(rows_h, rows_h4):
    """Eliminate the leading sqrt(h) discretization term of a comparison gap
    from estimates at steps h and h/4: g* = 2 g_{h/4} - g_h."""
    out = {}
    for k, (g, se, tb) in rows_h.items():
        g4, se4, tb4 = rows_h4[k]
        out[k] = (2.0 * g4 - g, math.sqrt(4.0 * se4 ** 2 + se ** 2), 2.0 * tb4 + tb)
    return out


def exp_derivatives(cfg: ExperimentConfig):
    """Derivative compositions against coupled finite differences, and the
    slope bounds at the selected barrier.

    Grid-level reflection carries an O(sqrt(h)) boundary-layer term for
    sigma > 0, and the composition and finite-difference estimators carry it
    with different constants; the comparisons are therefore run at steps h
    and h/4 and extrapolated to the continuum before banding.  Bounded
    variation kernels are exact in law, so one grid suffices there."""
    model, params, run = cfg.model, cfg.params, cfg.run
    beta = params.injection_cost
    a_ref = _anchor(cfg)
    spec = _spec(cfg, _OFF_DERIV)
    n = run.n_paths
    checks = []

    barrier_rows, ratio_row, slope_rows = _deriv_gaps(model, params, run, a_ref, spec)
    if model.sigma > 0.0:
        fine = _spec(cfg, _OFF_DERIV, grid_step=spec.grid_step / 4.0)
        b4, r4, s4 = _deriv_gaps(model, params, run, a_ref, fine)
        barrier_rows = _extrapolate(barrier_rows, b4)
        ratio_row = _extrapolate({0: ratio_row}, {0: r4})[0]
        slope_rows = _extrapolate(slope_rows, s4)

    for (key, mult) in sorted(barrier_rows, key=lambda km: (km[1], km[0])):
        g, se, tb = barrier_rows[(key, mult)]
        checks.append(
            band_check(
                "derivatives/barrier-%s-a%.3f" % (key, mult * a_ref),
                CLAIMS["barrier-derivative"],
                abs(g),
                3.0 * se + tb,
                stderr=se,
            )
        )
    g, se, tb = ratio_row
    checks.append(
        band_check(
            "derivatives/injection-ratio", CLAIMS["injection-ratio"], abs(g), 3.0 * se + tb, stderr=se
        )
    )
    for x in sorted(slope_rows):
        g, se, tb = slope_rows[x]
        checks.append(
            band_check(
                "derivatives/value-slope-x%.3f" % x,
                CLAIMS["value-slope"],
                abs(g),
                3.0 * se + tb,
                stderr=se,
            )
        )

    # slope bounds on a 9-point interior grid at the anchor barrier
    xs9 = np.linspace(0.1 * a_ref, 0.95 * a_ref, 9)
    slopes = []
    for x, e in zip(xs9, exit_laplace(model, params, xs9, a_ref, n, spec, run.n_workers)):
        slopes.append(value_derivative_in_x(params, float(x), a_ref, e))
    lower = min(s.mean - 1.0 + 3.0 * s.stderr + s.truncation_bound for s in slopes)
    upper = min(beta - s.mean + 3.0 * s.stderr + s.truncation_bound for s in slopes)
    checks.append(margin_check("derivatives/slope-lower-bound", CLAIMS["slope-bounds"], lower))
    checks.append(margin_check("derivatives/slope-upper-bound", CLAIMS["slope-bounds"], upper))
    # discrete concavity of the value itself (not the slope): per-path second
    # differences on shared paths, so the band reflects the coupled noise
    vl9, vr9, tl9, tr9 = npv_samples(model, params, xs9, [a_ref], n, spec, run.n_workers)
    val9 = vl9[0] - beta * vr9[0]
    tbv = np.empty(len(xs9))
    for i in range(len(xs9)):
        bl_i, br_i = _npv_bounds(params, spec.horizon, tl9[0, i], tr9[0, i])
        tbv[i] = bl_i + beta * br_i
    worst_d2 = -math.inf
    for k in range(1, len(xs9) - 1):
        d2 = val9[k - 1] - 2.0 * val9[k] + val9[k + 1]
        allow = 3.0 * float(np.std(d2) / math.sqrt(d2.shape[0]))
        allow += tbv[k - 1] + 2.0 * tbv[k] + tbv[k + 1]
        worst_d2 = max(worst_d2, float(np.mean(d2)) - allow)
    checks.append(
        band_check("derivatives/value-concavity", CLAIMS["slope-bounds"], worst_d2, 0.0)
    )
    if model.sigma > 0.0:
        e = exit_laplace(model, params, 0.97 * a_ref, a_ref, n, spec, run.n_workers)
        s = value_derivative_in_x(params, 0.97 * a_ref, a_ref, e)
        checks.append(
            band_check(
                "derivatives/slope-limit-at-barrier",
                CLAIMS["slope-limit"],
                abs(s.mean - 1.0),
                3.0 * s.stderr + s.truncation_bound + 0.05,
                stderr=s.stderr,
            )
        )
    else:
        checks.append(check("derivatives/slope-limit-at-barrier", CLAIMS["slope-limit"], "inconclusive"))
    return checks, {}


# ----------------------------------------------------------- astar_optimality


def exp_astar_optimality(cfg: ExperimentConfig):
    """Select the barrier, then test dominance of the selection over a
    geometric sweep and the single sign change of the value derivative."""
    model, params, run = cfg.model, cfg.params, cfg.run
    beta = params.injection_cost
    sel = select_barrier(
        model, params, run.tol_a, run.mc_budget, _spec(cfg, _OFF_SELECT), run.n_workers
    )
    astar = sel.barrier if sel.barrier > 0.0 else sel.bracket_hi
    checks = []
    cert_worst = max(
        beta * sel.nu_hi.mean - 1.0 - 3.0 * sel.nu_hi.stderr,
        1.0 - beta * sel.nu_lo.mean - 3.0 * sel.nu_lo.stderr,
    )
    checks.append(
        check(
            "astar/selection-certificate",
            CLAIMS["selection-certificate"],
            "pass" if sel.certified else "fail",
            value=cert_worst,
            tolerance=0.0,
            stderr=max(sel.nu_lo.stderr, sel.nu_hi.stderr),
        )
    )

    grid = default_sweep_grid(astar, 12)
    bars = np.unique(np.concatenate([grid, [astar]]))
    i_star = int(np.searchsorted(bars, astar))
    xs = astar * np.array([0.3, 0.65, 0.95])
    n_dom = max(2, run.mc_budget // (bars.size * xs.size))
    vl, vr, _, _ = npv_samples(model, params, xs, bars, n_dom, _spec(cfg, _OFF_DOMINANCE), run.n_workers)
    vals = vl - beta * vr  # (n_bars, n_x, n_paths)
    dom_rows = []
    for k, x in enumerate(xs):
        worst = math.inf
        worst_se = 0.0
        for bi in range(bars.size):
            diff = vals[i_star, k] - vals[bi, k]
            m = float(np.mean(diff))
            se = float(np.std(diff, ddof=1)) / math.sqrt(n_dom)
            dom_rows.append((float(x), float(bars[bi]), m, se))
            if bi != i_star and m + 3.0 * se < worst:
                worst = m + 3.0 * se
                worst_se = se
        checks.append(
            margin_check("astar/dominance-x%.3f" % x, CLAIMS["dominance"], worst, stderr=worst_se)
        )

    curve = barrier_sweep(
        model, params, float(xs[1]), grid, run.mc_budget, _spec(cfg, _OFF_SWEEP), run.n_workers
    )
    dv = np.array([d.value.mean for d in curve.derivative])
    se = np.array([d.value.stderr for d in curve.derivative])
    signs = np.sign(dv[np.abs(dv) > 3.0 * se])
    flips = int(np.sum(signs[1:] != signs[:-1]))
    checks.append(
        check(
            "astar/dv-sign-flip",
            CLAIMS["dv-sign-flip"],
            "pass" if flips == 1 else "fail",
            value=float(flips),
            tolerance=1.0,
        )
    )
    curves = {
        "dominance": (
            "x,a,value_gap_mean,value_gap_stderr",
            dom_rows,
        ),
        "barrier_sweep": (
            "a,nu_mean,nu_stderr,V_mean,V_stderr,dV",
            np.column_stack(
                [
                    curve.grid,
                    [e.mean for e in curve.nu],
                    [e.stderr for e in curve.nu],
                    [e.mean for e in curve.value],
                    [e.stderr for e in curve.value],
                    dv,
                ]
            ),
        ),
    }
    return checks, curves


# ------------------------------------------------------------------ generator


def exp_generator(cfg: ExperimentConfig):
    """Residuals of the value equation under the analytic profile; only
    meaningful where a scale table exists."""
    model, params = cfg.model, cfg.params
    if _oracle_route(model) != "direct":
        rows = [
            check("generator/interior", CLAIMS["generator-interior"], "inconclusive"),
            check("generator/above-barrier", CLAIMS["generator-above"], "inconclusive"),
            check("generator/negative-control", CLAIMS["generator-control"], "inconclusive"),
        ]
        return rows, {}
    a_ref = _anchor(cfg)
    table = scale_function(model, params.discount, x_max=2.0 * a_ref + 0.5)
    astar = analytic_optimal_barrier(table, params.injection_cost)
    if astar == 0.0:
        astar = 0.5 * a_ref
    profile = analytic_value_profile(table, params, astar)
    interior = np.linspace(0.05 * astar, 0.95 * astar, 15)
    res_in = generator_residual(model, params, profile, interior)
    vmag = np.array([abs(profile.value(float(x))) for x in interior])
    checks = [
        band_check(
            "generator/interior",
            CLAIMS["generator-interior"],
            float(np.max(np.abs(res_in) / (1.0 + vmag))),
            1e-3,
        )
    ]
    above = np.linspace(1.05 * astar, 1.95 * astar, 10)
    res_up = generator_residual(model, params, profile, above)
    checks.append(
        band_check("generator/above-barrier", CLAIMS["generator-above"], float(np.max(res_up)), 1e-3)
    )
    bad = analytic_value_profile(table, params, 0.5 * astar)
    ctrl = np.linspace(0.6 * astar, 0.95 * astar, 6)
    res_bad = generator_residual(model, params, bad, ctrl)
    checks.append(
        margin_check(
            "generator/negative-control",
            CLAIMS["generator-control"],
            float(np.max(res_bad)) - 1e-3,
        )
    )
    curves = {
        "generator_residual": (
            "x,residual,value",
            np.column_stack(
                [
                    np.concatenate([interior, above]),
                    np.concatenate([res_in, res_up]),
                    [profile.value(float(x)) for x in np.concatenate([interior, above])],
                ]
            ),
        )
    }
    return checks, curves


# ----------------------------------------------------------------- tournament


def _default_slate(astar: float):
    return [
        double_barrier(astar),
        double_barrier(0.5 * astar),
        double_barrier(2.0 * astar),
        periodic_review(astar, 0.5),
        periodic_review(astar, 0.1),
        hysteresis(astar, 0.5 * astar),
    ]


def exp_tournament(cfg: ExperimentConfig):
    """CRN ranking of the selected barrier against an admissible slate."""
    model, params, run = cfg.model, cfg.params, cfg.run
    if cfg.strategies:
        slate = list(cfg.strategies)
        astar = slate[0].barrier
    else:
        sel = select_barrier(
            model,
            params,
            max(run.tol_a, 0.02),
            run.mc_budget // 2,
            _spec(cfg, _OFF_SELECT),
            run.n_workers,
        )
        astar = sel.barrier if sel.barrier > 0.0 else sel.bracket_hi
        slate = _default_slate(astar)
    x_grid = astar * np.array([0.4, 0.8, 1.3])
    result = tournament(
        model, params, slate, x_grid, run.mc_budget, _spec(cfg, _OFF_TOURNAMENT), run.n_workers
    )
    checks = []
    if len(slate) == 1:
        checks.append(
            check("tournament/single-entry", CLAIMS["tournament-dominance"], "pass", value=1.0, tolerance=1.0)
        )
    for j in range(1, len(slate)):
        worst = math.inf
        worst_se = 0.0
        for k in range(x_grid.size):
            m = result.margin[j, k] + 3.0 * result.margin_stderr[j, k]
            if m < worst:
                worst = m
                worst_se = float(result.margin_stderr[j, k])
        checks.append(
            margin_check(
                "tournament/dominance-vs-%s" % slate[j].label,
                CLAIMS["tournament-dominance"],
                float(worst),
                stderr=worst_se,
            )
        )
    periodic = [(j, s) for j, s in enumerate(slate) if s.kind == "periodic_review"]
    if len(periodic) >= 2:
        periodic.sort(key=lambda js: js[1].review_dt)
        j_fine, j_coarse = periodic[0][0], periodic[-1][0]
        # margin rows share the champion term, so their difference is the
        # coarse-minus-fine value gap
        gaps = result.margin[j_coarse] - result.margin[j_fine]
        ses = np.hypot(result.margin_stderr[j_coarse], result.margin_stderr[j_fine])
        worst = float(np.min(gaps + 3.0 * ses))
        checks.append(
            margin_check("tournament/refinement-ordering", CLAIMS["tournament-refinement"], worst)
        )
    curve_rows = [
        (r["strategy"], r["x"], r["value_mean"], r["value_stderr"], r["margin"], r["margin_stderr"])
        for r in result.rows()
    ]
    curves = {
        "tournament": ("strategy,x,value_mean,value_stderr,margin,margin_stderr", curve_rows)
    }
    return checks, curves


EXPERIMENT_FUNCS = {
    "couplings": exp_couplings,
    "oracle_xval": exp_oracle_xval,
    "derivatives": exp_derivatives,
    "astar_optimality": exp_astar_optimality,
    "generator": exp_generator,
    "tournament": exp_tournament,
}


def claims_covered(checks) -> set:
    return {c["claim"] for c in checks}


def _meta(cfg: ExperimentConfig) -> dict:
    m, r = cfg.model, cfg.run
    return {
        "model": cfg.model_name,
        "gamma": m.gamma,
        "sigma": m.sigma,
        "jumps": repr(m.jumps),
        "discount": cfg.params.discount,
        "injection_cost": cfg.params.injection_cost,
        "experiment": cfg.experiment,
        "seed": r.seed,
        "n_paths": r.n_paths,
        "grid_step": r.grid_step,
        "horizon": _horizon(cfg),
        "n_workers": r.n_workers,
        "tol_a": r.tol_a,
        "mc_budget": r.mc_budget,
    }


def run_experiment(cfg: ExperimentConfig):
    """Execute the configured experiment(s).  Returns (checks, curves, meta);
    the caller decides where they go."""
    names = list(EXPERIMENT_FUNCS) if cfg.experiment == "all" else [cfg.experiment]
    checks = []
    curves = {}
    for name in names:
        c, cv = EXPERIMENT_FUNCS[name](cfg)
        checks.extend(c)
        for k, v in cv.items():
            curves[k] = v
    return checks, curves, _meta(cfg)
