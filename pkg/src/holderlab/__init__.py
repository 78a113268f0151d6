"""Numerical experiments on Hölder regularity of stationary measures of
random dynamical systems on one- and two-dimensional compact spaces."""
__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DomainError,
    HolderLabError,
    NumericalError,
    ResourceError,
    UnsupportedOperationError,
)
from .kernels import KernelParams, KernelTable, build_kernel_table, load_or_build_table, u_eval, u_reference, u_zero
from .lab import ContractionRateEstimator, HolderExponentEstimator
from .measures import ParticleMeasure
from .spaces import CIRCLE, DISK, INTERVAL, PROJECTIVE_LINE, get_space
from .systems import Affine1D, DistributionSpec, Moebius, Rotation

__all__ = [
    "__version__",
    "HolderLabError",
    "ConfigurationError",
    "DomainError",
    "NumericalError",
    "ResourceError",
    "UnsupportedOperationError",
    "KernelParams",
    "KernelTable",
    "build_kernel_table",
    "load_or_build_table",
    "u_eval",
    "u_reference",
    "u_zero",
    "ParticleMeasure",
    "CIRCLE",
    "DISK",
    "INTERVAL",
    "PROJECTIVE_LINE",
    "get_space",
    "Moebius",
    "Affine1D",
    "Rotation",
    "DistributionSpec",
    "ContractionRateEstimator",
    "HolderExponentEstimator",
]
