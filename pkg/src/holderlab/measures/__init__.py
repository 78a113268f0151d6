"""Particle measures: push-forwards, energies, densities and distances."""
from .core import (
    DEFAULT_EXACT_CAP,
    ParticleMeasure,
    ball_mass,
    cesaro_average,
    convolve_step,
    pushforward,
)
from .energy import (
    EXACT_ATOM_LIMIT,
    DensityGrid,
    EnergyValue,
    default_grid_points,
    energy_e,
    energy_te,
    rho_grid,
    theta_grid,
)
from .transport import DEFAULT_TV_BINS, tv_binned, wasserstein1d

__all__ = [
    "ParticleMeasure",
    "pushforward",
    "convolve_step",
    "cesaro_average",
    "ball_mass",
    "EnergyValue",
    "DensityGrid",
    "energy_e",
    "energy_te",
    "rho_grid",
    "theta_grid",
    "default_grid_points",
    "wasserstein1d",
    "tv_binned",
    "DEFAULT_EXACT_CAP",
    "DEFAULT_TV_BINS",
    "EXACT_ATOM_LIMIT",
]
