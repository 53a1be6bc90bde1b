"""Acceptance gate: the nine release criteria, one test and one summary line
each, at their pinned budgets and tolerances.

Statistical criteria use 3-stderr bands (plus explicit bias allowances where
the estimator carries one), so a borderline failure should first be re-run
with a fresh seed before being treated as a defect.  Runtime budgets are
asserted where the criterion pins one.
"""
from __future__ import annotations

import math
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from levydiv.barrier import value_derivative_in_x
from levydiv.config import ExperimentConfig, RunSettings
from levydiv.experiments import (
    CLAIMS,
    exp_astar_optimality,
    exp_derivatives,
    exp_generator,
)
from levydiv.fleet import FLEET, drift_flipped
from levydiv.mc import _npv_bounds, exit_laplace, npv_samples
from levydiv.paths import PathSpec, simulate_path
from levydiv.reflect import (
    barrier_coupling_violations,
    coupled_barrier_shift,
    coupled_initial_shift,
    start_coupling_violations,
)
from levydiv.scale import (
    exit_up_identity,
    scale_function,
    solve_phibar_fixed_point,
)

ROOT = Path(__file__).resolve().parents[1]


def _grid(model):
    return 0.008 if model.sigma > 0.0 else 0.02


def _cfg(entry, experiment, seed, n_paths, mc_budget, tol_a=0.02):
    run = RunSettings(
        seed=seed,
        n_paths=n_paths,
        grid_step=_grid(entry.model) if entry.model.sigma > 0.0 else 0.02,
        horizon=None,
        n_workers=1,
        tol_a=tol_a,
        mc_budget=mc_budget,
    )
    return ExperimentConfig(
        model=entry.model,
        params=entry.params,
        run=run,
        experiment=experiment,
        model_name=entry.name,
    )


def _line(num, label, ok, detail):
    print(
        "criterion %d (%s): %s - %s" % (num, label, "PASS" if ok else "FAIL", detail),
        flush=True,
    )


# criterion 1: pathwise coupling inequalities, 1000 paths per fleet model,
# every ordering within 1e-12, under one minute of wall time.
def test_criterion_1_pathwise_couplings():
    t0 = time.monotonic()
    x, a, eps = 0.6, 1.0, 0.25
    worst = -math.inf
    worst_tag = ""
    for entry in FLEET.values():
        spec = PathSpec(horizon=12.0, grid_step=_grid(entry.model), seed=901)
        for i in range(1000):
            p = simulate_path(entry.model, replace(spec, path_index=i))
            vb = barrier_coupling_violations(coupled_barrier_shift(p, x, a, eps))
            vs = start_coupling_violations(coupled_initial_shift(p, x, eps, a))
            for tag, v in list(vb.items()) + list(vs.items()):
                if v > worst:
                    worst, worst_tag = v, "%s/%s" % (entry.name, tag)
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-12 and elapsed < 60.0
    _line(
        1,
        "pathwise couplings",
        ok,
        "worst violation %.2e (%s, tol 1e-12), %.0fs (budget 60s)"
        % (worst, worst_tag, elapsed),
    )
    assert worst <= 1e-12
    assert elapsed < 60.0


# criterion 2: Monte Carlo upward-exit transform against the scale-function
# ratio on F1 and F4, 1e5 paths at grid step 1e-3, within 3 stderr at five
# interior starts; table self-check below 1e-6; under five minutes.
def test_criterion_2_scale_oracle_crossval():
    t0 = time.monotonic()
    worst_z = 0.0
    worst_def = 0.0
    for name in ("F1", "F4"):
        entry = FLEET[name]
        q = entry.params.discount
        a = entry.barrier_anchor
        xs = a * np.array([0.15, 0.35, 0.5, 0.65, 0.85])
        spec = PathSpec(horizon=30.0, grid_step=1e-3, seed=902)
        ests = exit_laplace(entry.model, entry.params, xs, a, 100_000, spec)
        table = scale_function(entry.model, q, x_max=a + 0.5)
        worst_def = max(worst_def, table.definition_check())
        for xv, e in zip(xs, ests):
            want = exit_up_identity(table, float(xv), a)
            se = max(e.up.stderr, 1e-300)
            z = abs(e.up.mean - want) / se
            worst_z = max(worst_z, z + e.up.truncation_bound / se)
    elapsed = time.monotonic() - t0
    ok = worst_z <= 3.0 and worst_def <= 1e-6 and elapsed < 300.0
    _line(
        2,
        "scale oracle cross-validation",
        ok,
        "worst |z| %.2f (tol 3), definition check %.1e (tol 1e-6), %.0fs (budget 300s)"
        % (worst_z, worst_def, elapsed),
    )
    assert worst_z <= 3.0
    assert worst_def <= 1e-6
    assert elapsed < 300.0


# criterion 3: the fixed-point construction for two-sided models with a
# diffusion part contracts at the predicted rate and matches Monte Carlo.
def test_criterion_3_fixed_point_oracle():
    entry = FLEET["F3"]
    m, q = entry.model, entry.params.discount
    a = entry.barrier_anchor
    pb = solve_phibar_fixed_point(m, q, a)
    rate_pos = m.jumps.rate * m.jumps.prob_positive
    rate_cap = rate_pos / (q + rate_pos) + 0.05
    xs = a * np.array([0.15, 0.35, 0.5, 0.65, 0.85])
    spec = PathSpec(horizon=30.0, grid_step=0.004, seed=903)
    ests = exit_laplace(m, entry.params, xs, a, 30_000, spec)
    worst_z = 0.0
    for xv, e in zip(xs, ests):
        se = max(e.up.stderr, 1e-300)
        z = abs(e.up.mean - float(pb(xv))) / se
        worst_z = max(worst_z, z + e.up.truncation_bound / se)
    ok = pb.contraction_rate <= rate_cap and worst_z <= 3.0
    _line(
        3,
        "fixed-point oracle",
        ok,
        "contraction %.3f (cap %.3f), worst MC |z| %.2f (tol 3)"
        % (pb.contraction_rate, rate_cap, worst_z),
    )
    assert pb.contraction_rate <= rate_cap
    assert worst_z <= 3.0


# criterion 4: transform compositions for the barrier derivative (three
# barriers per fleet model) and the value slope (five interior starts)
# against common-random-number finite differences, 3 combined stderr.
def test_criterion_4_derivative_compositions():
    want = {CLAIMS["barrier-derivative"], CLAIMS["value-slope"]}
    ok = True
    details = []
    for entry in FLEET.values():
        cfg = _cfg(entry, "derivatives", 904, 2500, 25_000)
        rows, _ = exp_derivatives(cfg)
        rows = [r for r in rows if r["claim"] in want]
        n_bar = sum(1 for r in rows if r["name"].startswith("derivatives/barrier-"))
        n_slope = sum(1 for r in rows if "value-slope" in r["name"])
        bad = [r["name"] for r in rows if r["status"] != "pass"]
        if n_bar != 6 or n_slope != 5 or bad:
            ok = False
        details.append("%s %d/%d" % (entry.name, len(rows) - len(bad), len(rows)))
        if bad:
            details.append("failing: " + ", ".join(bad))
    _line(4, "derivative compositions", ok, "; ".join(details))
    assert ok


# criterion 5: the selected barrier dominates a 12-point geometric sweep at
# three starts per fleet model within 3 stderr, and the barrier-derivative
# sign flips exactly once across the sweep.
def test_criterion_5_barrier_optimality():
    ok = True
    details = []
    for entry in FLEET.values():
        tol_a = 0.03 if entry.name == "F5" else 0.02
        cfg = _cfg(entry, "astar_optimality", 905, 3000, 30_000, tol_a=tol_a)
        rows, _ = exp_astar_optimality(cfg)
        bad = [r["name"] for r in rows if r["status"] != "pass"]
        if bad:
            ok = False
            details.append("%s failing: %s" % (entry.name, ", ".join(bad)))
        else:
            details.append("%s %d/%d" % (entry.name, len(rows), len(rows)))
    _line(5, "barrier optimality", ok, "; ".join(details))
    assert ok


# criterion 6: value-slope shape at the anchor barrier: slope within
# [1 - 3se, beta + 3se] on a nine-point interior grid, discrete concavity of
# the value (second differences nonpositive up to the coupled noise), and
# slope -> 1 at the barrier when sigma > 0.
def test_criterion_6_value_shape():
    ok = True
    details = []
    for entry in FLEET.values():
        m, par = entry.model, entry.params
        beta = par.injection_cost
        a = entry.barrier_anchor
        xs = np.linspace(0.1 * a, 0.95 * a, 9)
        spec = PathSpec(horizon=30.0, grid_step=_grid(m), seed=906)
        ests = exit_laplace(m, par, xs, a, 20_000, spec)
        slopes = [value_derivative_in_x(par, float(xv), a, exit=e) for xv, e in zip(xs, ests)]
        mean = np.array([s.mean for s in slopes])
        se = np.array([s.stderr for s in slopes])
        tb = np.array([s.truncation_bound for s in slopes])
        lo_margin = float(np.min(mean - 1.0 + 3.0 * se + tb))
        hi_margin = float(np.min(beta - mean + 3.0 * se + tb))
        vl, vr, tl, tr = npv_samples(m, par, xs, [a], 4000, spec)
        val = vl[0] - beta * vr[0]
        tbv = np.empty(len(xs))
        for i in range(len(xs)):
            bl_i, br_i = _npv_bounds(par, spec.horizon, tl[0, i], tr[0, i])
            tbv[i] = bl_i + beta * br_i
        concave_worst = -math.inf
        for k in range(1, len(xs) - 1):
            d2 = val[k - 1] - 2.0 * val[k] + val[k + 1]
            allow = 3.0 * float(np.std(d2) / math.sqrt(d2.shape[0]))
            allow += tbv[k - 1] + 2.0 * tbv[k] + tbv[k + 1]
            concave_worst = max(concave_worst, float(np.mean(d2)) - allow)
        entry_ok = lo_margin >= 0.0 and hi_margin >= 0.0 and concave_worst <= 0.0
        limit_txt = ""
        if m.sigma > 0.0:
            e97 = exit_laplace(m, par, [0.97 * a], a, 20_000, spec)
            s97 = value_derivative_in_x(par, 0.97 * a, a, exit=e97[0])
            gap = abs(s97.mean - 1.0)
            band = 3.0 * s97.stderr + s97.truncation_bound + 0.05
            entry_ok = entry_ok and gap <= band
            limit_txt = ", limit gap %.3f (band %.3f)" % (gap, band)
        ok = ok and entry_ok
        details.append(
            "%s lo %.3f hi %.3f concavity %.3f%s"
            % (entry.name, lo_margin, hi_margin, concave_worst, limit_txt)
        )
    _line(6, "value shape", ok, "; ".join(details))
    assert ok


# criterion 7: generator residual of the closed-form F4 value: within
# 1e-3 * (1 + |v|) below the barrier, at most +1e-3 above it, and a
# deliberately wrong barrier fails the same residual test.
def test_criterion_7_generator_residual():
    cfg = _cfg(FLEET["F4"], "generator", 907, 2000, 20_000)
    rows, _ = exp_generator(cfg)
    names = {r["name"] for r in rows}
    bad = [r["name"] for r in rows if r["status"] != "pass"]
    ok = not bad and len(rows) == 3 and any("control" in n for n in names)
    _line(
        7,
        "generator residual",
        ok,
        "3 checks (interior band, above-barrier band, negative control), failing: %s"
        % (", ".join(bad) if bad else "none"),
    )
    assert ok


# criterion 8: horizon-doubling stability of the injection estimate for the
# barrier policy on every fleet model, and for the pay-everything policy on
# F2 under both drift signs.
def test_criterion_8_horizon_stability():
    cases = []
    for entry in FLEET.values():
        a = entry.barrier_anchor
        cases.append((entry.name, entry.model, entry.params, 0.6 * a, a))
    f2 = FLEET["F2"]
    flipped = drift_flipped(f2)
    cases.append(("F2/pi0", f2.model, f2.params, 0.4 * f2.barrier_anchor, 0.0))
    cases.append(("%s/pi0" % flipped.name, flipped.model, flipped.params,
                  0.4 * f2.barrier_anchor, 0.0))
    T = 24.0
    ok = True
    details = []
    for tag, m, par, x, a in cases:
        g = _grid(m)
        s1 = PathSpec(horizon=T, grid_step=g, seed=908)
        s2 = PathSpec(horizon=2.0 * T, grid_step=g, seed=908)
        _, vr1, _, tr1 = npv_samples(m, par, [x], [a], 2500, s1)
        _, vr2, _, tr2 = npv_samples(m, par, [x], [a], 2500, s2)
        _, br1 = _npv_bounds(par, T, tr1, tr1)
        gaps = vr2[0, 0] - vr1[0, 0]
        gap = abs(float(np.mean(gaps)))
        band = br1 + 3.0 * float(np.std(gaps) / math.sqrt(gaps.size))
        if gap > band:
            ok = False
        details.append("%s gap %.1e (band %.1e)" % (tag, gap, band))
    _line(8, "horizon stability", ok, "; ".join(details))
    assert ok


# criterion 9: two full runs of the same config produce byte-identical
# reports.
def test_criterion_9_reproducibility(tmp_path):
    cfg = ROOT / "configs" / "smoke.toml"
    outs = []
    for sub in ("one", "two"):
        out = tmp_path / sub
        r = subprocess.run(
            [sys.executable, "-m", "levydiv.cli", "run",
             "--config", str(cfg), "--out", str(out)],
            cwd=ROOT,
            capture_output=True,
            text=True,
        )
        assert r.returncode == 0, r.stderr
        outs.append((out / "report.json").read_bytes())
    ok = outs[0] == outs[1]
    _line(
        9,
        "reproducibility",
        ok,
        "two runs, %d bytes each, byte-identical: %s" % (len(outs[0]), ok),
    )
    assert ok
