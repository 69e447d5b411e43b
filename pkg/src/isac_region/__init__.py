"""Secrecy-distortion region toolkit for degraded ISAC channels with actions."""

__version__ = "0.1.0"

from ._validation import DomainError, SizeError, SpecError, UsageError
from .channel import (
    AuxDist,
    ChannelSpec,
    DegradednessReport,
    Diagnostic,
    DistortionSpec,
    check_degraded,
    check_spec,
    eav_observation_law,
    joint_law,
    legit_observation_law,
    validate,
)
from .estimator import (
    EstimatorTable,
    PosteriorArgminEstimator,
    brute_force_best,
    build_estimator,
    expected_distortion,
)
from .fbl import (
    FblQuery,
    FblResult,
    delta_distortion,
    dispersions,
    explicit_bounds,
    fbl_rates,
    mu_min,
    normal_approx_rates,
    q_func,
    q_inv,
    sensitivity_sweep,
)
from .osrb import BinningRealization, SimConfig, SimReport, decode, draw_binning, encode, transmit
from .osrb import run as simulate
from .prob import (
    Alphabet,
    CondPmf,
    JointPmf,
    Pmf,
    compose,
    conditional,
    conditional_entropy,
    entropy,
    info_density,
    marginalize,
    mutual_information,
    self_info,
    variational_distance,
)
from .region import (
    FrontierSweep,
    RegionPoint,
    SecrecyRegionSearch,
    evaluate_point,
    sweep_frontier,
    weighted_scalarization,
)

__all__ = [name for name in dir() if not name.startswith("_")]
