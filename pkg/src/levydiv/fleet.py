"""The shipped test fleet: five models spanning every case split the theory
makes (bounded/unbounded variation, one/two-sided jumps), with the problem
parameters and grid anchors the experiment suite uses.

barrier_anchor is a coarse Monte Carlo calibration of the optimal barrier,
good enough to center grids and brackets; the experiments re-estimate it and
never treat the anchor as an oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .models import (
    Exponential,
    ExpMixture,
    JumpSpec,
    LevyModel,
    ProblemParams,
    mirror,
)

__all__ = ["FleetEntry", "FLEET", "fleet_entry", "drift_flipped"]


@dataclass(frozen=True)
class FleetEntry:
    name: str
    description: str
    model: LevyModel
    params: ProblemParams
    barrier_anchor: float


_P18 = ProblemParams(discount=0.3, injection_cost=1.8)

FLEET = {
    "F1": FleetEntry(
        name="F1",
        description="Brownian motion with drift (unbounded variation, no jumps)",
        model=LevyModel(gamma=0.25, sigma=0.45, jumps=None),
        params=_P18,
        barrier_anchor=0.5486,
    ),
    "F2": FleetEntry(
        name="F2",
        description="bounded variation, positive drift, two-sided exponential jumps",
        model=LevyModel(
            gamma=0.35,
            sigma=0.0,
            jumps=JumpSpec(
                rate=2.0,
                prob_positive=0.5,
                positive=Exponential(2.0),
                negative=Exponential(2.5),
            ),
        ),
        params=_P18,
        barrier_anchor=0.44,
    ),
    "F3": FleetEntry(
        name="F3",
        description="two-sided mixed-exponential jump diffusion",
        model=LevyModel(
            gamma=0.1,
            sigma=0.35,
            jumps=JumpSpec(
                rate=1.8,
                prob_positive=0.45,
                positive=ExpMixture((0.6, 0.4), (3.0, 6.0)),
                negative=ExpMixture((0.5, 0.5), (2.5, 5.0)),
            ),
        ),
        params=ProblemParams(discount=0.35, injection_cost=1.8),
        barrier_anchor=0.61,
    ),
    "F4": FleetEntry(
        name="F4",
        description="drift minus exponential claims (one-sided, closed-form oracle)",
        model=LevyModel(
            gamma=0.6436,
            sigma=0.0,
            jumps=JumpSpec(rate=1.2, prob_positive=0.0, negative=Exponential(2.0)),
        ),
        params=_P18,
        barrier_anchor=0.6268,
    ),
    "F5": FleetEntry(
        name="F5",
        description="spectrally positive mirror of F4",
        model=mirror(
            LevyModel(
                gamma=0.6436,
                sigma=0.0,
                jumps=JumpSpec(rate=1.2, prob_positive=0.0, negative=Exponential(2.0)),
            )
        ),
        params=_P18,
        barrier_anchor=1.31,
    ),
}


def fleet_entry(name: str) -> FleetEntry:
    try:
        return FLEET[name]
    except KeyError:
        raise KeyError(
            "unknown fleet model %r (have %s)" % (name, ", ".join(sorted(FLEET)))
        ) from None


def drift_flipped(entry: FleetEntry) -> FleetEntry:
    """The same jump structure with the linear drift negated; used to probe
    the pay-everything policy under both drift signs."""
    m = entry.model
    return replace(
        entry,
        name=entry.name + "-drift-flipped",
        description=entry.description + ", drift negated",
        model=LevyModel(gamma=-m.gamma, sigma=m.sigma, jumps=m.jumps),
        barrier_anchor=entry.barrier_anchor,
    )
