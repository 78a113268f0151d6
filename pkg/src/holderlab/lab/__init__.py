"""Experiments: stationary measures, regularity profiles, energy traces and
residual checks."""
from .appendix import LOG_MOMENT_LIMIT, local_dimension_trace, moment_table, sample_stationary
from .checks import dispersion_check, theta_equivariance_check, variance_identity_check
from .contraction import (
    ContractionRateEstimator,
    EnergyTrace,
    energy_trace,
    fit_contraction,
    scale_threshold_check,
)
from .holder import (
    HolderExponentEstimator,
    HolderProfile,
    fit_power_law,
    holder_constant,
    holder_profile,
    sup_ball_mass,
    window_sup_mass,
)
from .reports import CheckReport
from .stationary import iterate_measures, stationary_estimate

__all__ = [
    "CheckReport",
    "stationary_estimate",
    "iterate_measures",
    "HolderProfile",
    "holder_profile",
    "sup_ball_mass",
    "window_sup_mass",
    "holder_constant",
    "fit_power_law",
    "HolderExponentEstimator",
    "EnergyTrace",
    "energy_trace",
    "fit_contraction",
    "ContractionRateEstimator",
    "scale_threshold_check",
    "variance_identity_check",
    "theta_equivariance_check",
    "dispersion_check",
    "local_dimension_trace",
    "moment_table",
    "sample_stationary",
    "LOG_MOMENT_LIMIT",
]
