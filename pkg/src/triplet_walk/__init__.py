"""Three-photon states from third-order down-conversion in two coupled waveguides."""

from .analysis import (
    ClassificationReport,
    ConditionMatch,
    DensityMatrix,
    NoTripletError,
    classify,
    density_matrix,
    fidelity,
    ghz_param_check,
    hbs_param_check,
    normalize,
    uniform_param_check,
    weak_coupling_ratios,
)
from .core import (
    BASIS_LABELS,
    CouplerParams,
    Spectrum,
    TripletAmplitudes,
    coupling_matrix,
    effective_phase_mismatch,
    phase_match_profile,
    source_vector,
    spectrum,
)
from .dynamics import Trajectory, analytic_state, integrate_rk4, symmetric_state, trajectory_probabilities
from .explore import (
    ParameterBox,
    SweepAxis,
    enumerate_condition_families,
    search_max_fidelity,
    sweep_2d_hbs,
    sweep_c3,
    sweep_dbeta_z,
)

__all__ = [
    "ClassificationReport",
    "ConditionMatch",
    "DensityMatrix",
    "NoTripletError",
    "classify",
    "density_matrix",
    "fidelity",
    "ghz_param_check",
    "hbs_param_check",
    "normalize",
    "uniform_param_check",
    "weak_coupling_ratios",
    "BASIS_LABELS",
    "CouplerParams",
    "Spectrum",
    "TripletAmplitudes",
    "coupling_matrix",
    "effective_phase_mismatch",
    "phase_match_profile",
    "source_vector",
    "spectrum",
    "Trajectory",
    "analytic_state",
    "integrate_rk4",
    "symmetric_state",
    "trajectory_probabilities",
    "ParameterBox",
    "SweepAxis",
    "enumerate_condition_families",
    "search_max_fidelity",
    "sweep_2d_hbs",
    "sweep_c3",
    "sweep_dbeta_z",
]

__version__ = "0.1.0"
