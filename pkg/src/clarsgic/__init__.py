"""Complex LARS knots with GIC model-order selection for sparse regression and compressed beamforming."""

__version__ = "0.1.0"

from .cbf_model import AngularGrid, Scenario, build_dictionary, generate_snapshot, steering_vector
from .cd_lasso import cd_solve, grid_gic_select, lambda_grid
from .clars_path import LassoPath, compute_path, lambda_zero
from .model_select import Selection, clars_gic, penalty_sequence, select_model
from .numerics import correlations, ls_fit, soft_threshold

__all__ = [
    "AngularGrid", "LassoPath", "Scenario", "Selection",
    "build_dictionary", "cd_solve", "clars_gic", "compute_path", "correlations",
    "generate_snapshot", "grid_gic_select", "lambda_grid", "lambda_zero", "ls_fit",
    "penalty_sequence", "select_model", "soft_threshold", "steering_vector",
]
