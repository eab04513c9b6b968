"""Joint vehicle tracking and acceleration-field learning.

An extended Kalman filter tracks a position/velocity state together with a
sparse Gaussian-process model of an unknown position-dependent acceleration
field. The field is shared across vehicles, so each tracked trajectory
improves the next one. The package also ships the intersection simulation
used to benchmark the approach against a plain constant-velocity filter.
"""

from ._version import __version__
from .estimators import CvTracker, GpassmTracker
from .field import FieldBelief, InducingGrid, build_grid, prior_belief
from .filtering import AugmentedBelief, augmented_prior
from .harness import (ExperimentResult, VehicleRunRecord, compute_rmse, export_field,
                      export_results, run_experiment, run_vehicle)
from .kernels import KernelParams
from .scenario import ScenarioConfig, build_paths, generate_truth, load_config
from .validation import NumericalError

__all__ = [
    "__version__",
    "AugmentedBelief",
    "CvTracker",
    "ExperimentResult",
    "FieldBelief",
    "GpassmTracker",
    "InducingGrid",
    "KernelParams",
    "NumericalError",
    "ScenarioConfig",
    "VehicleRunRecord",
    "augmented_prior",
    "build_grid",
    "build_paths",
    "compute_rmse",
    "export_field",
    "export_results",
    "generate_truth",
    "load_config",
    "prior_belief",
    "run_experiment",
    "run_vehicle",
]
