"""NLOS-robust TOA localization via sparse recovery of range biases."""

from nlos_locate.errors import (
    DegenerateGeometryError,
    DivergenceError,
    EstimationError,
    LocalizationError,
    SingularityError,
    TransformError,
)
from nlos_locate.geo import NoiseModel, Point2, measure_ranges, true_range
from nlos_locate.taylor import PositionEstimate, TaylorConfig, jacobian_row, solve, taylor_step
from nlos_locate.imat import (
    GeometricDecay,
    KeepLargestK,
    MaskedObservation,
    SparseDomainPair,
    imat_recover,
    required_measurements,
)
from nlos_locate.srni import SrniConfig, SrniResult, srni_solve, threshold_largest, transform_to_nlos, valid_zone
from nlos_locate.baselines import bounding_box_estimate, rwgh_estimate

__version__ = "0.1.0"

__all__ = [
    "DegenerateGeometryError",
    "DivergenceError",
    "EstimationError",
    "GeometricDecay",
    "KeepLargestK",
    "LocalizationError",
    "MaskedObservation",
    "NoiseModel",
    "Point2",
    "PositionEstimate",
    "SingularityError",
    "SparseDomainPair",
    "SrniConfig",
    "SrniResult",
    "TaylorConfig",
    "TransformError",
    "bounding_box_estimate",
    "imat_recover",
    "jacobian_row",
    "measure_ranges",
    "required_measurements",
    "rwgh_estimate",
    "solve",
    "srni_solve",
    "taylor_step",
    "threshold_largest",
    "transform_to_nlos",
    "true_range",
    "valid_zone",
]
