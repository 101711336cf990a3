"""Boundary-integral solver and mesh studies for multilayer Helmholtz scattering."""

__version__ = "0.1.0"

from .analytic import (LayerConfig, ModeCoefficients, NearResonanceError,
                       eval_analytic, eval_sound_hard, incident_field,
                       solve_mode_coefficients, sound_hard_coefficients,
                       transmission_residuals)
from .adapt import (AdaptSchedule, AdaptState, MetricField, SampleGrid,
                    adapt_loop, boundary_point_counts, build_sample_grids,
                    interpolation_error_bound, optimal_metric,
                    recover_hessian)
from .cases import CASES, CaseSpec, get_case
from .errors import (ErrorReport, boundary_l2_error, perforated_volume_error,
                     radial_l2_error, radial_sweep)
from .geometry import BoundaryGrid, InterfaceCurve, make_grid
from .search import (SearchResult, SearchSchedule, estimate_nppw,
                     find_machine_precision_M, find_optimal_M,
                     general_rule_estimate)
from .solver import (IllConditionedSystemError, SystemMatrix, TraceSolution,
                     assemble_system, eval_field, solve_config, solve_traces)

__all__ = [name for name in dir() if not name.startswith("_")]
