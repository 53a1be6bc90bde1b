"""Experiment configuration: one TOML file, one ingestion path.

Schema (keys, units, defaults):

    [model]                  # either a fleet preset or an explicit triplet
    preset = "F1"            # F1..F5; excludes the explicit keys below
    gamma = 0.25             # linear coefficient of the triplet
    sigma = 0.45             # diffusion coefficient, >= 0
    [model.jumps]            # optional; omit for no jumps
    rate = 1.8               # total jump arrival rate, > 0
    prob_positive = 0.45     # thinning probability of an upward jump
    [model.jumps.positive]   # required when prob_positive > 0
    kind = "exp_mixture"     # "exponential" | "exp_mixture" | "point_mass"
    weights = [0.6, 0.4]
    rates = [3.0, 6.0]
    [model.jumps.negative]   # required when prob_positive < 1
    kind = "exponential"
    rate = 2.0

    [params]
    discount = 0.3           # q > 0, per unit time
    injection_cost = 1.8     # beta > 1

    [run]
    seed = 1234              # required; no wall-clock default
    n_paths = 4000           # paths per estimate
    grid_step = 0.01         # time step of the diffusion grid
    horizon = 0.0            # 0 selects ln(1e6)/q
    n_workers = 1
    tol_a = 0.02             # bracket width target for barrier selection
    mc_budget = 40000        # path evaluations for selection/sweeps

    [experiment]
    name = "all"             # couplings | oracle_xval | derivatives |
                             # astar_optimality | generator | tournament | all

    [[strategies]]           # optional tournament entries; first = champion.
    kind = "double_barrier"  # omit the array to use the built-in slate
    barrier = 0.55
"""
from __future__ import annotations

from dataclasses import dataclass, replace

try:
    import tomllib
except ModuleNotFoundError:  # 3.10: tomllib landed in 3.11
    import tomli as tomllib

from .fleet import FLEET
from .models import (
    Exponential,
    ExpMixture,
    JumpSpec,
    LevyModel,
    PointMass,
    ProblemParams,
    validate_model,
)
from .strategies import StrategySpec

__all__ = [
    "ConfigError",
    "RunSettings",
    "ExperimentConfig",
    "EXPERIMENTS",
    "load_config",
    "parse_config",
]

EXPERIMENTS = (
    "couplings",
    "oracle_xval",
    "derivatives",
    "astar_optimality",
    "generator",
    "tournament",
    "all",
)


class ConfigError(Exception):
    """Malformed configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunSettings:
    seed: int
    n_paths: int = 4000
    grid_step: float = 0.01
    horizon: float | None = None  # None selects the discount-driven default
    n_workers: int = 1
    tol_a: float = 0.02
    mc_budget: int = 40000


@dataclass(frozen=True)
class ExperimentConfig:
    model: LevyModel
    params: ProblemParams
    run: RunSettings
    experiment: str = "all"
    strategies: tuple = ()
    model_name: str = "custom"

    def with_overrides(self, seed=None, n_paths=None, experiment=None):
        run = self.run
        if seed is not None:
            run = replace(run, seed=int(seed))
        if n_paths is not None:
            run = replace(run, n_paths=int(n_paths))
        out = replace(self, run=run)
        if experiment is not None:
            if experiment not in EXPERIMENTS:
                raise ConfigError(
                    "experiment.name: %r is not one of %s" % (experiment, ", ".join(EXPERIMENTS))
                )
            out = replace(out, experiment=experiment)
        return out


def _section(data, key, required=False):
    sec = data.get(key)
    if sec is None:
        if required:
            raise ConfigError("[%s]: section is required" % key)
        return {}
    if not isinstance(sec, dict):
        raise ConfigError("[%s]: expected a table" % key)
    return sec


def _number(sec, key, path, default=None, required=False, positive=False, minimum=None):
    if key not in sec:
        if required:
            raise ConfigError("%s.%s: key is required" % (path, key))
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("%s.%s: expected a number, got %r" % (path, key, v))
    v = float(v)
    if positive and not v > 0.0:
        raise ConfigError("%s.%s: must be positive" % (path, key))
    if minimum is not None and v < minimum:
        raise ConfigError("%s.%s: must be at least %g" % (path, key, minimum))
    return v


def _integer(sec, key, path, default=None, required=False, positive=False):
    if key not in sec:
        if required:
            raise ConfigError("%s.%s: key is required" % (path, key))
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError("%s.%s: expected an integer, got %r" % (path, key, v))
    if positive and v <= 0:
        raise ConfigError("%s.%s: must be positive" % (path, key))
    return v


def _distribution(sec, path):
    kind = sec.get("kind")
    if kind == "exponential":
        return Exponential(_number(sec, "rate", path, required=True, positive=True))
    if kind == "exp_mixture":
        weights = sec.get("weights")
        rates = sec.get("rates")
        if not isinstance(weights, list) or not isinstance(rates, list):
            raise ConfigError("%s: exp_mixture needs weights and rates arrays" % path)
        try:
            return ExpMixture(tuple(float(w) for w in weights), tuple(float(r) for r in rates))
        except (TypeError, ValueError) as e:
            raise ConfigError("%s: %s" % (path, e)) from None
    if kind == "point_mass":
        return PointMass(_number(sec, "size", path, required=True, positive=True))
    raise ConfigError(
        "%s.kind: expected exponential, exp_mixture, or point_mass, got %r" % (path, kind)
    )


def _model(data):
    sec = _section(data, "model", required=True)
    preset = sec.get("preset")
    if preset is not None:
        extra = set(sec) - {"preset"}
        if extra:
            raise ConfigError(
                "model.preset excludes explicit keys (found %s)" % ", ".join(sorted(extra))
            )
        if preset not in FLEET:
            raise ConfigError(
                "model.preset: %r is not one of %s" % (preset, ", ".join(sorted(FLEET)))
            )
        return FLEET[preset].model, preset
    gamma = _number(sec, "gamma", "model", required=True)
    sigma = _number(sec, "sigma", "model", required=True, minimum=0.0)
    jumps = None
    jsec = sec.get("jumps")
    if jsec is not None:
        if not isinstance(jsec, dict):
            raise ConfigError("model.jumps: expected a table")
        rate = _number(jsec, "rate", "model.jumps", required=True, positive=True)
        pp = _number(jsec, "prob_positive", "model.jumps", required=True, minimum=0.0)
        if pp > 1.0:
            raise ConfigError("model.jumps.prob_positive: must lie in [0, 1]")
        pos = neg = None
        if "positive" in jsec:
            pos = _distribution(jsec["positive"], "model.jumps.positive")
        if "negative" in jsec:
            neg = _distribution(jsec["negative"], "model.jumps.negative")
        try:
            jumps = JumpSpec(rate=rate, prob_positive=pp, positive=pos, negative=neg)
        except ValueError as e:
            raise ConfigError("model.jumps: %s" % e) from None
    try:
        model = LevyModel(gamma=gamma, sigma=sigma, jumps=jumps)
        validate_model(model)
    except ValueError as e:
        raise ConfigError("model: %s" % e) from None
    return model, "custom"


def _strategies(data):
    blocks = data.get("strategies")
    if blocks is None:
        return ()
    if not isinstance(blocks, list):
        raise ConfigError("strategies: expected an array of tables")
    out = []
    for i, b in enumerate(blocks):
        path = "strategies[%d]" % i
        if not isinstance(b, dict):
            raise ConfigError("%s: expected a table" % path)
        kind = b.get("kind")
        if not isinstance(kind, str):
            raise ConfigError("%s.kind: key is required" % path)
        kwargs = {"kind": kind, "barrier": _number(b, "barrier", path, required=True)}
        if "review_dt" in b:
            kwargs["review_dt"] = _number(b, "review_dt", path)
        if "lower" in b:
            kwargs["lower"] = _number(b, "lower", path)
        extra = set(b) - {"kind", "barrier", "review_dt", "lower"}
        if extra:
            raise ConfigError("%s: unknown keys %s" % (path, ", ".join(sorted(extra))))
        try:
            out.append(StrategySpec(**kwargs))
        except ValueError as e:
            raise ConfigError("%s: %s" % (path, e)) from None
    return tuple(out)


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a table")
    known = {"model", "params", "run", "experiment", "strategies"}
    extra = set(data) - known
    if extra:
        raise ConfigError("unknown top-level sections: %s" % ", ".join(sorted(extra)))
    model, model_name = _model(data)

    psec = _section(data, "params", required=True)
    q = _number(psec, "discount", "params", required=True, positive=True)
    beta = _number(psec, "injection_cost", "params", required=True)
    if not beta > 1.0:
        raise ConfigError("params.injection_cost: must exceed 1")
    params = ProblemParams(discount=q, injection_cost=beta)

    rsec = _section(data, "run", required=True)
    horizon = _number(rsec, "horizon", "run", default=0.0, minimum=0.0)
    run = RunSettings(
        seed=_integer(rsec, "seed", "run", required=True),
        n_paths=_integer(rsec, "n_paths", "run", default=4000, positive=True),
        grid_step=_number(rsec, "grid_step", "run", default=0.01, positive=True),
        horizon=None if horizon == 0.0 else horizon,
        n_workers=_integer(rsec, "n_workers", "run", default=1, positive=True),
        tol_a=_number(rsec, "tol_a", "run", default=0.02, positive=True),
        mc_budget=_integer(rsec, "mc_budget", "run", default=40000, positive=True),
    )
    extra_run = set(rsec) - {"seed", "n_paths", "grid_step", "horizon", "n_workers", "tol_a", "mc_budget"}
    if extra_run:
        raise ConfigError("run: unknown keys %s" % ", ".join(sorted(extra_run)))

    esec = _section(data, "experiment")
    name = esec.get("name", "all")
    if name not in EXPERIMENTS:
        raise ConfigError("experiment.name: %r is not one of %s" % (name, ", ".join(EXPERIMENTS)))

    return ExperimentConfig(
        model=model,
        params=params,
        run=run,
        experiment=name,
        strategies=_strategies(data),
        model_name=model_name,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as e:
        raise ConfigError("cannot read %s: %s" % (path, e)) from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("%s: %s" % (path, e)) from None
    return parse_config(data)
