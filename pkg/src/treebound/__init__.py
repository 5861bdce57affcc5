"""Contraction-rate bounds for consensus over time-varying spanning trees."""
from ._backend import BACKEND
from .dynamics import (SimulationConfig, Trajectory, diameter_vector,
                       empirical_rate, extremal_system, random_system_matrix,
                       run_simulation, run_stationary, step,
                       verify_comparison_step, verify_trajectory)
from .params import (ParameterError, StarParams, TreeParams, star_params,
                     star_params_lambda, validate_tree_params)
from .spectral import (BoundReport, build_comparison_matrix, build_zeta,
                       char_poly_eval, classical_bound, rho_asymptotic,
                       rho_bound, rho_threshold_depth, spectral_gap_ratio,
                       spectral_radius_power)
from .topology import (DepthProfile, NestedSets, TreeMatrix, TreeShape,
                       check_assumption, materialize_tree_matrix, nested_sets,
                       nested_sets_from_depths, parse_shapes, sequence_depths)

__version__ = "0.1.0"
