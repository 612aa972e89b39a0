"""fochaos: stabilizing unstable periodic orbits of fractional-order chaotic
systems with adaptive delayed-feedback sliding-mode control."""

from .controller import (ControlDecomposition, ControllerConfig, SlidingSurface,
                         adaptation_rates, compute_error, control_law,
                         linear_delayed_feedback, lyapunov_diagnostic,
                         sliding_surface, switching_function)
from .delay_history import DelayedSample, HistoryBuffer, HistoryLookupError
from .fde_solver import (FDEProblem, SolverDivergenceError, SolverOutput,
                         pece_weights, solve, solve_reference_classical)
from .frac_calc import (GainCheck, LinearFOSystem, SampledSignal,
                        StabilityReport, caputo_derivative_estimate,
                        check_linear_stability, fractional_integral,
                        validate_sliding_gains)
from .experiments import (ComparisonReport, Metrics, ScenarioConfig,
                          SimulationConfig, Trajectory, compare_controllers,
                          compute_metrics, emit_comparison, emit_outputs,
                          extract_reference_orbit, periodicity_defect,
                          run_closed_loop)
from .systems import (SystemDefinition, duffing_system, eval_plant_rate,
                      gyro_system, make_system)

__version__ = "0.1.0"
