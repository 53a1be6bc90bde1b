"""Double-barrier dividend and capital-injection control for Levy surplus
processes with two-sided jumps: exact pathwise reflection, common-random-number
Monte Carlo valuation, barrier selection, and spectrally one-sided oracles."""

from .models import (
    Exponential,
    ExpMixture,
    JumpSpec,
    LevyModel,
    PointMass,
    ProblemParams,
    Variation,
    char_exponent,
    classify_variation,
    laplace_exponent,
    linear_drift,
    mean_rate,
    mirror,
    validate_model,
)
from .paths import PathSpec, SamplePath, simulate_path
from .reflect import (
    BarrierShiftCoupling,
    ControlledTrajectory,
    HittingReport,
    InitialShiftCoupling,
    ReflectedPath,
    barrier_coupling_violations,
    coupled_barrier_shift,
    coupled_initial_shift,
    doubly_reflect,
    hitting_times,
    reflect_above,
    start_coupling_violations,
    zero_barrier,
)
from .mc import (
    ExitLaplace,
    MCEstimate,
    default_horizon,
    drawdown_laplace,
    estimate_npv,
    exit_laplace,
    first_dividend_laplace,
    npv_fd_barrier,
    npv_fd_start,
    npv_samples,
    npv_table,
)
from .scale import (
    PhibarTable,
    ScaleTable,
    ValueProfile,
    analytic_barrier_derivative,
    analytic_drawdown_transform,
    analytic_first_dividend_transform,
    analytic_optimal_barrier,
    analytic_value_dividends,
    analytic_value_injections,
    analytic_value_profile,
    apply_generator,
    exit_down_identity,
    exit_up_identity,
    generator_residual,
    largest_root,
    resolvent_functional,
    scale_function,
    solve_phibar_fixed_point,
    strip_positive_jumps,
)
from .barrier import (
    BarrierCurve,
    BarrierDerivative,
    BarrierSelection,
    barrier_sweep,
    default_sweep_grid,
    select_barrier,
    value_derivative_in_a,
    value_derivative_in_x,
)
from .strategies import (
    StrategySpec,
    TournamentResult,
    double_barrier,
    estimate_strategy_npv,
    hysteresis,
    periodic_review,
    strategy_npv_samples,
    tournament,
)
from .fleet import FLEET, FleetEntry, drift_flipped, fleet_entry
from .config import ConfigError, ExperimentConfig, RunSettings, load_config, parse_config
from .experiments import CLAIMS, run_experiment
from .report import band_check, check, checks_to_csv, margin_check, render_report, write_outputs

__version__ = "0.1.0"
