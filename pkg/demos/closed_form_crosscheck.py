"""
Closed-form value versus Monte Carlo on the classical claims model
==================================================================

Drift minus exponential claims admits a closed-form scale function, so
every quantity the simulator estimates has an exact counterpart: the
upward-exit transform, the barrier value, the optimal barrier, and the
generator residual of the candidate value.
"""
import numpy as np

from levydiv import (
    FLEET,
    PathSpec,
    analytic_optimal_barrier,
    analytic_value_profile,
    estimate_npv,
    exit_laplace,
    exit_up_identity,
    generator_residual,
    scale_function,
)

entry = FLEET["F4"]
model, params = entry.model, entry.params
q, beta = params.discount, params.injection_cost
print(entry.name, "-", entry.description)

# the scale table drives every closed-form formula below
table = scale_function(model, q, x_max=2.0)
print("scale table self-check (transform definition): %.1e" % table.definition_check())

# optimal barrier from the first-order condition on the table
astar = analytic_optimal_barrier(table, beta)
print("closed-form optimal barrier a* = %.4f (fleet anchor %.4f)"
      % (astar, entry.barrier_anchor))

# upward-exit transform: simulation against the scale-function ratio
spec = PathSpec(horizon=30.0, grid_step=0.01, seed=11)
xs = astar * np.array([0.25, 0.5, 0.75])
print("\nupward-exit transform at three starts, 20000 paths:")
for x, est in zip(xs, exit_laplace(model, params, xs, astar, 20_000, spec)):
    exact = exit_up_identity(table, float(x), astar)
    z = (est.up.mean - exact) / est.up.stderr
    print("  x=%.3f  mc %.4f +/- %.4f   exact %.4f   z=%+.2f"
          % (x, est.up.mean, est.up.stderr, exact, z))

# the barrier value itself: simulated against the closed-form profile
profile = analytic_value_profile(table, params, astar)
x0 = 0.5 * astar
est = estimate_npv(model, params, x0, astar, 20_000, spec)
print("\nvalue at x=%.3f under the a* policy:" % x0)
print("  mc    %.4f +/- %.4f" % (est.value.mean, est.value.stderr))
print("  exact %.4f   z=%+.2f" % (profile.value(x0),
                                  (est.value.mean - profile.value(x0)) / est.value.stderr))

# below the barrier the candidate value solves the generator equation;
# above it the residual turns nonpositive
interior = np.linspace(0.05 * astar, 0.95 * astar, 10)
above = np.linspace(1.05 * astar, 1.9 * astar, 6)
res_in = generator_residual(model, params, profile, interior)
res_up = generator_residual(model, params, profile, above)
print("\ngenerator residual, interior max |res|: %.2e" % np.max(np.abs(res_in)))
print("generator residual, above the barrier (should be <= 0): max %.3e" % np.max(res_up))
