"""Exact-event path sampling.

Rows of a sampled path are strictly increasing times, each carrying the
continuous increment accrued over the preceding interval plus an optional
jump landing at the row time.  Jump arrival times are exact (exponential
inter-arrival sums, never snapped to a grid); when sigma > 0 the continuous
part is evaluated on the absolute clock k*grid_step intersected with the
inter-jump gaps.  Both conventions make a path a bitwise prefix of the same
path sampled with a longer horizon or a finer grid (finer grids only refine
the continuous evaluation times).

Randomness is split by purpose into disjoint counter blocks of one Philox
stream keyed by (seed, path_index): arrivals, Gaussian increments, bridge
uniforms, jump signs, positive sizes, negative sizes.  Refining the grid or
extending the horizon therefore reuses identical jump data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import LevyModel, linear_drift, validate_model

__all__ = ["PathSpec", "SamplePath", "simulate_path", "path_value"]

# purpose indices: third counter word of the Philox block
_ARRIVALS, _GAUSS, _BRIDGE, _SIGNS, _SIZE_POS, _SIZE_NEG = 1, 2, 3, 4, 5, 6


@dataclass(frozen=True)
class PathSpec:
    horizon: float
    grid_step: float
    seed: int
    path_index: int = 0

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        if not 0.0 < self.grid_step <= self.horizon:
            raise ValueError("grid_step must lie in (0, horizon]")
        if self.path_index < 0:
            raise ValueError("path_index must be nonnegative")


@dataclass(frozen=True)
class SamplePath:
    """times[k] strictly increasing in (0, horizon]; cont[k] is the continuous
    increment over (times[k-1], times[k]]; jump[k] the signed jump at times[k]
    (0 if none).  X_t - X_0 = sum of cont+jump over rows with time <= t."""

    times: np.ndarray
    cont: np.ndarray
    jump: np.ndarray
    horizon: float
    sigma: float
    drift: float  # effective linear drift of the continuous part


def _stream(seed: int, path_index: int, purpose: int) -> np.random.Generator:
    bg = np.random.Philox(
        counter=np.array([0, 0, purpose, 0], dtype=np.uint64),
        key=np.array([seed, path_index], dtype=np.uint64),
    )
    return np.random.Generator(bg)


def _arrival_times(rng: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    if rate <= 0.0:
        return np.empty(0)
    out = []
    t = 0.0
    block = max(8, int(rate * horizon * 1.5) + 8)
    while t < horizon:
        gaps = rng.standard_exponential(block) / rate
        cum = t + np.cumsum(gaps)
        out.append(cum)
        t = cum[-1]
    times = np.concatenate(out)
    return times[times < horizon]


def _sample_jumps(model: LevyModel, spec: PathSpec):
    """Exact jump times and signed sizes, in time order."""
    j = model.jumps
    if j is None or j.rate == 0.0:
        return np.empty(0), np.empty(0)
    jt = _arrival_times(
        _stream(spec.seed, spec.path_index, _ARRIVALS), j.rate, spec.horizon
    )
    n = jt.size
    if n == 0:
        return jt, np.empty(0)
    if j.prob_positive >= 1.0:
        pos = np.ones(n, dtype=bool)
    elif j.prob_positive <= 0.0:
        pos = np.zeros(n, dtype=bool)
    else:
        u = _stream(spec.seed, spec.path_index, _SIGNS).random(n)
        pos = u < j.prob_positive
    sizes = np.empty(n)
    npos = int(pos.sum())
    if npos:
        law = j.positive
        u = _stream(spec.seed, spec.path_index, _SIZE_POS).random((npos, law.draws_per_jump))
        sizes[pos] = law.sample_from_uniforms(u)
    if n - npos:
        law = j.negative
        u = _stream(spec.seed, spec.path_index, _SIZE_NEG).random((n - npos, law.draws_per_jump))
        sizes[~pos] = -law.sample_from_uniforms(u)
    return jt, sizes


def _path_arrays(model: LevyModel, spec: PathSpec, bridge: bool = False):
    """(times, cont, jump, bridge_uniforms|None) row data for one path."""
    d = linear_drift(model)
    T = spec.horizon
    jt, js = _sample_jumps(model, spec)
    if model.sigma == 0.0:
        times = np.unique(np.concatenate([jt, [T]]))
    else:
        ngrid = int(np.floor(T / spec.grid_step))
        grid = spec.grid_step * np.arange(1, ngrid + 1)
        times = np.unique(np.concatenate([grid, jt, [T]]))
    jump = np.zeros(times.size)
    if jt.size:
        np.add.at(jump, np.searchsorted(times, jt), js)
    dt = np.diff(times, prepend=0.0)
    cont = d * dt
    if model.sigma > 0.0:
        z = _stream(spec.seed, spec.path_index, _GAUSS).standard_normal(times.size)
        cont = cont + model.sigma * np.sqrt(dt) * z
    bru = None
    if bridge:
        bru = _stream(spec.seed, spec.path_index, _BRIDGE).random(times.size)
    return times, cont, jump, bru


def simulate_path(model: LevyModel, spec: PathSpec) -> SamplePath:
    validate_model(model)
    times, cont, jump, _ = _path_arrays(model, spec)
    return SamplePath(
        times=times,
        cont=cont,
        jump=jump,
        horizon=spec.horizon,
        sigma=model.sigma,
        drift=linear_drift(model),
    )


def path_value(path: SamplePath, t: float) -> float:
    """X_t - X_0 (cadlag: the jump at t is included)."""
    if not 0.0 <= t <= path.horizon:
        raise ValueError("t must lie in [0, horizon]")
    k = np.searchsorted(path.times, t, side="right")
    return float(np.sum(path.cont[:k]) + np.sum(path.jump[:k]))
