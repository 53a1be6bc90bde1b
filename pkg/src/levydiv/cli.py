"""Command line front end.

Four subcommands, all driven by one TOML config file (schema documented in
config.py):

    levydiv validate --config run.toml
    levydiv run --config run.toml [--experiment all] [--out out]
    levydiv sweep --config run.toml [--out out]
    levydiv tournament --config run.toml [--out out]

Exit codes: 0 all checks passed, 1 at least one check failed, 2 malformed
config, 3 estimation failure.  Outputs under --out are byte-reproducible
for a fixed config.
"""
from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .experiments import run_experiment
from .report import failures, write_outputs

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levydiv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, experiment_flag):
        sp.add_argument("--config", required=True, help="TOML experiment config")
        sp.add_argument("--seed", type=int, default=None, help="override run.seed")
        sp.add_argument("--paths", type=int, default=None, help="override run.n_paths")
        if experiment_flag:
            sp.add_argument(
                "--experiment",
                choices=EXPERIMENTS,
                default=None,
                help="override the configured experiment selector",
            )
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument(
            "--format", choices=("json", "csv"), default="json", help="also emit report.csv"
        )

    common(sub.add_parser("validate", help="parse the config and report problems"), False)
    common(sub.add_parser("run", help="run the configured experiment(s)"), True)
    common(sub.add_parser("sweep", help="barrier selection, sweep, and derivative checks"), False)
    common(sub.add_parser("tournament", help="rank the configured strategies on shared paths"), False)
    return p


def _execute(cfg, out_dir, fmt) -> int:
    checks, curves, meta = run_experiment(cfg)
    path = write_outputs(out_dir, checks, meta, curves=curves, fmt=fmt)
    bad = failures(checks)
    n = len(checks)
    print("%s: %d checks, %d failed" % (path, n, len(bad)))
    for c in bad:
        print("  FAIL %s (%s)" % (c["name"], c["claim"]))
    return 1 if bad else 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(
            seed=args.seed,
            n_paths=args.paths,
            experiment=getattr(args, "experiment", None),
        )
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    if args.command == "validate":
        print("config ok: model=%s experiment=%s seed=%d" % (cfg.model_name, cfg.experiment, cfg.run.seed))
        return 0
    if args.command == "sweep":
        cfg = cfg.with_overrides(experiment="astar_optimality")
    elif args.command == "tournament":
        cfg = cfg.with_overrides(experiment="tournament")
    try:
        return _execute(cfg, args.out, args.format)
    except RuntimeError as e:
        print("estimation failure: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
