"""
Anatomy of a doubly reflected dividend path
===========================================

One sample path of a two-sided jump process, pushed into the band [0, a]
by the two regulators: dividends skim the surplus at the barrier, capital
injections prop it up at zero.  The running totals are exactly the
cumulative payout streams the valuation discounts.
"""
import numpy as np

from levydiv import (
    Exponential,
    JumpSpec,
    LevyModel,
    PathSpec,
    barrier_coupling_violations,
    coupled_barrier_shift,
    doubly_reflect,
    simulate_path,
)

# a bounded-variation model: positive drift, two-sided exponential jumps
model = LevyModel(
    gamma=0.35,
    sigma=0.0,
    jumps=JumpSpec(
        rate=2.0, prob_positive=0.5, positive=Exponential(2.0), negative=Exponential(2.5)
    ),
)

spec = PathSpec(horizon=12.0, grid_step=0.05, seed=7)
path = simulate_path(model, spec)
print("raw path: %d events over [0, %.0f]" % (path.times.size, spec.horizon))

# reflect it into [0, a]: the controlled surplus, with both regulators
x, a = 0.25, 0.6
traj = doubly_reflect(path, x, a)
print("controlled surplus stays in [%.3f, %.3f] (band [0, %.1f])"
      % (traj.surplus.min(), traj.surplus.max(), a))
print("dividends paid      %.4f  (%d lump payouts)"
      % (traj.dividends[-1], np.count_nonzero(traj.dividend_atoms)))
print("capital injected    %.4f  (%d lump injections)"
      % (traj.injections[-1], np.count_nonzero(traj.injection_atoms)))

# shift the barrier up by eps and drive BOTH reflections with the same
# noise: the dividend stream drops, the injection stream drops, and the
# two surpluses never separate by more than eps
eps = 0.1
coup = coupled_barrier_shift(path, x, a, eps)
gap = coup.surplus_hi - coup.surplus_lo
print("\nbarrier shifted %.2f -> %.2f on the same noise:" % (a, a + eps))
print("surplus gap stays in [0, eps]: min %.2e, max %.4f <= %.1f"
      % (gap.min(), gap.max(), eps))
print("foregone dividends grow to %.4f, spared injections to %.4f"
      % (coup.dividend_gap[-1], coup.injection_gap[-1]))

worst = max(barrier_coupling_violations(coup).values())
print("worst ordering violation across the path: %.1e" % worst)
