"""Report assembly, experiment orchestration, and the CLI contract."""
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from levydiv.cli import main
from levydiv.config import load_config
from levydiv.experiments import CLAIMS, _oracle_route, claims_covered, run_experiment
from levydiv.fleet import FLEET, drift_flipped, fleet_entry
from levydiv.models import Exponential, JumpSpec, LevyModel, mean_rate
from levydiv.report import (
    band_check,
    check,
    checks_to_csv,
    failures,
    margin_check,
    render_report,
    write_outputs,
)

SMOKE = """
[model]
preset = "F2"
[params]
discount = 0.3
injection_cost = 1.8
[run]
seed = 42
n_paths = 200
grid_step = 0.05
horizon = 18.0
tol_a = 0.05
mc_budget = 4000
[experiment]
name = "all"
"""


def _cfg(tmp_path, text=SMOKE, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------- report


def test_check_rows_and_failures():
    rows = [
        band_check("a", "claim A", 0.5, 1.0, stderr=0.1),
        band_check("b", "claim B", 2.0, 1.0),
        margin_check("c", "claim C", -0.2),
        check("d", "claim D", "inconclusive"),
    ]
    assert [r["status"] for r in rows] == ["pass", "fail", "fail", "inconclusive"]
    assert [r["name"] for r in failures(rows)] == ["b", "c"]
    assert rows[0]["stderr"] == 0.1
    assert rows[3]["value"] is None


def test_check_rejects_bad_status():
    with pytest.raises(ValueError):
        check("x", "c", "maybe")


def test_render_report_deterministic_and_nan_safe():
    rows = [band_check("nan-row", "c", float("nan"), 1.0), band_check("inf-row", "c", float("inf"), 1.0)]
    meta = {"seed": 1}
    s1 = render_report(rows, meta)
    s2 = render_report(rows, meta)
    assert s1 == s2
    doc = json.loads(s1)
    assert doc["checks"][0]["status"] == "fail"  # NaN never passes
    assert doc["checks"][0]["value"] is None
    assert doc["checks"][1]["value"] == 1e308
    assert doc["summary"] == {"n_checks": 2, "n_fail": 2, "n_inconclusive": 0, "n_pass": 0}


def test_csv_quotes_commas():
    row = band_check("dominance-vs-periodic_review(a=0.6, dt=0.5)", "claim, with comma", 0.0, 1.0)
    text = checks_to_csv([row])
    assert '"dominance-vs-periodic_review(a=0.6, dt=0.5)"' in text
    assert '"claim, with comma"' in text
    assert text.splitlines()[0] == "name,claim,status,value,tolerance,stderr"


def test_write_outputs_layout(tmp_path):
    rows = [band_check("a", "c", 0.0, 1.0)]
    curves = {"t": ("x,y", [(1.0, 2.0), (3.0, 4.5)]), "s": ("k,label", [(1.0, "w, z")])}
    out = tmp_path / "out"
    path = write_outputs(out, rows, {"seed": 3}, curves=curves, fmt="csv")
    assert str(path) == str(out / "report.json")
    assert (out / "report.csv").exists()
    assert sorted(p.name for p in (out / "curves").iterdir()) == ["s.csv", "t.csv"]
    assert (out / "curves" / "t.csv").read_text() == "x,y\n1.0,2.0\n3.0,4.5\n"
    assert '"w, z"' in (out / "curves" / "s.csv").read_text()
    # json format omits report.csv
    out2 = tmp_path / "out2"
    write_outputs(out2, rows, {"seed": 3}, fmt="json")
    assert not (out2 / "report.csv").exists()


# ------------------------------------------------------------ experiments


def test_oracle_route_classification():
    assert _oracle_route(LevyModel(0.25, 0.45, None)) == "direct"
    assert _oracle_route(FLEET["F4"].model) == "direct"
    assert _oracle_route(FLEET["F3"].model) == "fixed_point"
    assert _oracle_route(FLEET["F2"].model) == "none"
    assert _oracle_route(FLEET["F5"].model) == "none"


def test_fleet_entries_span_the_case_splits():
    assert set(FLEET) == {"F1", "F2", "F3", "F4", "F5"}
    assert FLEET["F1"].model.jumps is None
    assert FLEET["F2"].model.sigma == 0.0
    assert FLEET["F3"].model.sigma > 0.0 and FLEET["F3"].model.jumps.rate_pos > 0.0
    assert FLEET["F4"].model.jumps.rate_pos == 0.0
    assert FLEET["F5"].model.jumps.rate_neg == 0.0
    with pytest.raises(KeyError, match="F7"):
        fleet_entry("F7")
    flipped = drift_flipped(FLEET["F2"])
    assert flipped.model.gamma == -FLEET["F2"].model.gamma
    assert mean_rate(flipped.model) < 0.0 < mean_rate(FLEET["F2"].model)


def test_full_run_covers_every_claim(tmp_path):
    cfg = load_config(_cfg(tmp_path))
    checks, curves, meta = run_experiment(cfg)
    assert claims_covered(checks) == set(CLAIMS.values())
    assert meta["model"] == "F2"
    assert meta["horizon"] == 18.0
    assert "tournament" in curves and "barrier_sweep" in curves
    # a same-config rerun reproduces every row exactly
    checks2, _, _ = run_experiment(cfg)
    assert checks == checks2


def test_single_experiment_dispatch(tmp_path):
    text = SMOKE.replace('preset = "F2"', 'preset = "F4"').replace('name = "all"', 'name = "generator"')
    cfg = load_config(_cfg(tmp_path, text))
    checks, curves, _ = run_experiment(cfg)
    assert all(c["name"].startswith("generator/") for c in checks)
    assert {c["status"] for c in checks} == {"pass"}
    assert "generator_residual" in curves


# ------------------------------------------------------------------- CLI


def test_cli_validate_and_run(tmp_path):
    p = _cfg(tmp_path)
    assert main(["validate", "--config", str(p)]) == 0
    out = tmp_path / "out"
    assert main(["run", "--config", str(p), "--experiment", "couplings", "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["summary"]["n_fail"] == 0
    assert doc["config"]["experiment"] == "couplings"


def test_cli_overrides_reach_the_report(tmp_path):
    p = _cfg(tmp_path)
    out = tmp_path / "out"
    code = main(
        ["run", "--config", str(p), "--experiment", "couplings", "--seed", "77", "--paths", "150",
         "--out", str(out), "--format", "csv"]
    )
    assert code == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["config"]["seed"] == 77
    assert doc["config"]["n_paths"] == 150
    assert (out / "report.csv").exists()


def test_cli_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[model\n")
    assert main(["validate", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2
    err = capsys.readouterr().err
    assert "config error" in err


def test_cli_check_failure_exits_1(tmp_path):
    # a champion far below the good barrier loses the tournament
    text = SMOKE.replace('name = "all"', 'name = "tournament"') + (
        "[[strategies]]\nkind = \"double_barrier\"\nbarrier = 0.05\n"
        "[[strategies]]\nkind = \"double_barrier\"\nbarrier = 0.44\n"
    )
    p = _cfg(tmp_path, text)
    out = tmp_path / "out"
    assert main(["tournament", "--config", str(p), "--out", str(out)]) == 1
    doc = json.loads((out / "report.json").read_text())
    assert doc["summary"]["n_fail"] >= 1


def test_cli_estimation_failure_exits_3(tmp_path, monkeypatch, capsys):
    import levydiv.cli as cli_mod

    def boom(cfg):
        raise RuntimeError("estimation failure: rigged")

    monkeypatch.setattr(cli_mod, "run_experiment", boom)
    assert main(["run", "--config", str(_cfg(tmp_path))]) == 3
    assert "estimation failure" in capsys.readouterr().err


def test_cli_sweep_subcommand_forces_experiment(tmp_path):
    p = _cfg(tmp_path)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(p), "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["config"]["experiment"] == "astar_optimality"
    assert all(c["name"].startswith("astar/") for c in doc["checks"])


def test_cli_module_entry_point(tmp_path):
    p = _cfg(tmp_path)
    res = subprocess.run(
        [sys.executable, "-m", "levydiv.cli", "validate", "--config", str(p)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert "config ok" in res.stdout
