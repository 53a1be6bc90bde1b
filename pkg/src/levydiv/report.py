"""Deterministic report emission.

Reports must be byte-identical across runs with the same config: no
timestamps, no environment echoes, insertion-ordered rows, sorted JSON keys,
and floats rendered by repr (shortest round-trip form).  Every check row
carries the claim label it tests, a pass/fail/inconclusive status, the
measured value, its tolerance, and a standard error where one exists.
"""
from __future__ import annotations

import json
import math
import os

__all__ = ["check", "render_report", "checks_to_csv", "write_outputs", "failures"]

_STATUSES = ("pass", "fail", "inconclusive")

_CSV_FIELDS = ("name", "claim", "status", "value", "tolerance", "stderr")


def _finite(v):
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return 1e308 if v > 0 else -1e308
    return v


def check(name, claim, status, value=None, tolerance=None, stderr=None):
    """One report row.  `status` must be pass, fail, or inconclusive."""
    if status not in _STATUSES:
        raise ValueError("status must be one of %s" % (_STATUSES,))
    if not isinstance(name, str) or not name:
        raise ValueError("check name must be a nonempty string")
    return {
        "name": name,
        "claim": str(claim),
        "status": status,
        "value": _finite(value),
        "tolerance": _finite(tolerance),
        "stderr": _finite(stderr),
    }


def band_check(name, claim, value, tolerance, stderr=None):
    """Pass iff value <= tolerance (both recorded)."""
    status = "pass" if float(value) <= float(tolerance) else "fail"
    return check(name, claim, status, value=value, tolerance=tolerance, stderr=stderr)


def margin_check(name, claim, margin, stderr=None):
    """Pass iff margin >= 0 (one-sided slack, dead band already applied)."""
    status = "pass" if float(margin) >= 0.0 else "fail"
    return check(name, claim, status, value=margin, tolerance=0.0, stderr=stderr)


def failures(checks) -> list:
    return [c for c in checks if c["status"] == "fail"]


def render_report(checks, meta) -> str:
    doc = {
        "config": meta,
        "checks": list(checks),
        "summary": {
            "n_checks": len(checks),
            "n_pass": sum(1 for c in checks if c["status"] == "pass"),
            "n_fail": sum(1 for c in checks if c["status"] == "fail"),
            "n_inconclusive": sum(1 for c in checks if c["status"] == "inconclusive"),
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    s = str(v)
    if "," in s or '"' in s or "\n" in s:
        s = '"%s"' % s.replace('"', '""')
    return s


def checks_to_csv(checks) -> str:
    lines = [",".join(_CSV_FIELDS)]
    for c in checks:
        lines.append(",".join(_cell(c[f]) for f in _CSV_FIELDS))
    return "\n".join(lines) + "\n"


def _curve_csv(header, rows) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(_cell(v if isinstance(v, str) else float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_outputs(out_dir, checks, meta, curves=None, fmt="json"):
    """Write report.json (always), report.csv when fmt is csv, and one CSV
    per curve under curves/.  Returns the report path."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_report(checks, meta))
    if fmt == "csv":
        with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(checks_to_csv(checks))
    if curves:
        cdir = os.path.join(out_dir, "curves")
        os.makedirs(cdir, exist_ok=True)
        for name, (header, rows) in curves.items():
            with open(os.path.join(cdir, name + ".csv"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(_curve_csv(header, rows))
    return path
