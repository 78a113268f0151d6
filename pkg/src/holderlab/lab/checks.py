"""Residual checks on single convolution steps."""
import math

import numpy as np

from ..errors import ConfigurationError
from ..kernels import KernelParams
from ..measures import (
    ParticleMeasure,
    convolve_step,
    pushforward,
    rho_grid,
    theta_grid,
    tv_binned,
    wasserstein1d,
)
from ..systems import DistributionSpec, MapDescriptor
from .reports import CheckReport

__all__ = ["variance_identity_check", "theta_equivariance_check", "dispersion_check"]

VARIANCE_TOL = 1e-10


def _sqnorm(values, vol):
    return math.fsum(values * values * vol)


def variance_identity_check(mu: DistributionSpec, nu: ParticleMeasure, params: KernelParams,
                            grid_points=256, threshold: float = VARIANCE_TOL) -> CheckReport:
    """Mean squared deviation of the smoothed images against the second-moment
    form.

    With ``rho_j`` the smoothing of ``f_j* nu`` and ``rho_bar = sum_j p_j rho_j``
    the residual is ``|sum_j p_j |rho_j - rho_bar|^2 - (sum_j p_j |rho_j|^2
    - |rho_bar|^2)|`` relative to ``|rho_bar|^2``.  ``details`` also records
    the grid energy of ``mu * nu`` against the average grid energy of the
    images, which can never be larger.
    """
    grids = [rho_grid(pushforward(f, nu), params, grid_points) for f in mu.maps]
    vol = grids[0].cell_volumes
    p = mu.probabilities
    rho = np.array([g.values for g in grids])
    rho_bar = p @ rho
    lhs = math.fsum(pj * _sqnorm(r - rho_bar, vol) for pj, r in zip(p, rho))
    second = math.fsum(pj * _sqnorm(r, vol) for pj, r in zip(p, rho))
    bar = _sqnorm(rho_bar, vol)
    residual = abs(lhs - (second - bar)) / bar
    direct = rho_grid(convolve_step(mu, nu, "exact"), params, grid_points)
    te_conv = _sqnorm(direct.values, vol)
    details = {
        "variance": lhs,
        "te_convolution": te_conv,
        "te_average": second,
        "rho_linearity_error": float(np.max(np.abs(direct.values - rho_bar)) / np.max(np.abs(rho_bar))),
        "inequality_holds": bool(te_conv <= second * (1.0 + 1e-12)),
    }
    return CheckReport("variance_identity", len(mu), float(residual), threshold, details)


def theta_equivariance_check(f: MapDescriptor, nu: ParticleMeasure, params: KernelParams,
                             grid_points=None, threshold=None) -> CheckReport:
    """Wasserstein distance between ``f_* theta(nu)`` and ``theta(f_* nu)``.

    Both densities are discretised as atoms at the grid nodes.  The default
    threshold is five percent of the diameter.
    """
    if nu.space.dimension != 1:
        raise ConfigurationError("theta equivariance uses the 1-D Wasserstein distance", key="space")
    before = theta_grid(nu, params, grid_points).as_measure()
    after = theta_grid(pushforward(f, nu), params, grid_points).as_measure()
    dist = wasserstein1d(pushforward(f, before), after)
    thr = 0.05 * nu.space.diameter if threshold is None else float(threshold)
    return CheckReport("theta_equivariance", len(before), dist, thr,
                       {"lip_constant": f.lip_constant(), "grid_points": len(before)})


def dispersion_check(mu: DistributionSpec, nu: ParticleMeasure, bins=None,
                     threshold: float = math.inf) -> CheckReport:
    """Average distance ``sum_j p_j W(f_j* nu, mu * nu)`` of the images.

    Zero exactly when every image coincides with the average, i.e. when
    ``nu`` has a deterministic image.  With ``bins`` set the binned total
    variation replaces the Wasserstein distance (needed on the disk).
    ``threshold`` is an optional upper bound; by default the report only
    records the value.
    """
    avg = convolve_step(mu, nu, "exact")
    vals = []
    for f in mu.maps:
        img = pushforward(f, nu)
        vals.append(tv_binned(img, avg, bins) if bins else wasserstein1d(img, avg))
    value = math.fsum(p * v for p, v in zip(mu.probabilities, vals))
    metric = "tv" if bins else "wasserstein"
    return CheckReport("dispersion", len(mu), value, threshold, {"metric": metric, "per_map": vals})
