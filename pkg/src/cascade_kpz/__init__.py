"""Multiplicative cascade metrics on [0, 1] and the dimension relation zeta0 = phi(zeta)."""

__version__ = "0.1.0"

from .cascade import CascadeRealization, DepthExceededError  # noqa: E402
from .dimension import DimensionEstimate, euclid_dimension, partition_function, quantum_dimension  # noqa: E402
from .fractal_sets import DigitRestrictionSet, DyadicIndex, cover, cover_count, zeta0  # noqa: E402
from .kpz import central_charge, gaussian_kpz, predict_zeta0, solve_zeta, twopoint_kpz  # noqa: E402
from .weights import Empirical, LogNormal, TwoPoint, moment, neg_moment, phi, validate  # noqa: E402

__all__ = [
    "CascadeRealization",
    "DepthExceededError",
    "DigitRestrictionSet",
    "DimensionEstimate",
    "DyadicIndex",
    "Empirical",
    "LogNormal",
    "TwoPoint",
    "central_charge",
    "cover",
    "cover_count",
    "euclid_dimension",
    "gaussian_kpz",
    "moment",
    "neg_moment",
    "partition_function",
    "phi",
    "predict_zeta0",
    "quantum_dimension",
    "solve_zeta",
    "twopoint_kpz",
    "validate",
    "zeta0",
]
