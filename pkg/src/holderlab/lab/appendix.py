"""Local dimension of the stationary measure of the heavy-tailed family."""
import math

import numpy as np

from ..errors import ConfigurationError
from ..rng import uniforms
from ..spaces import PROJECTIVE_LINE
from ..systems import DistributionSpec, Moebius, appendix_a_family, log_moment, moment_gamma, sample_indices

__all__ = ["sample_stationary", "local_dimension_trace", "moment_table", "LOG_MOMENT_LIMIT"]

# limit of the untruncated log-moment series: 2 ln 2 * sum n^2 2^-n
LOG_MOMENT_LIMIT = 12.0 * math.log(2.0)
MIN_EXPECTED_HITS = 10


def sample_stationary(mu: DistributionSpec, samples: int, seed: int = 0, burn_in: int = 64) -> np.ndarray:
    """Forward-iterate independent particles from evenly spread angles.

    Step ``t`` of particle ``p`` picks its map with counter ``(seed, t, p)``.
    """
    samples = int(samples)
    if samples < 1:
        raise ConfigurationError("need at least one sample", key="particles")
    x = PROJECTIVE_LINE.uniform_points(samples)
    idx = np.arange(samples, dtype=np.uint64)
    for t in range(1, int(burn_in) + 1):
        which = sample_indices(mu, uniforms(seed, t, idx, 0))
        for j, f in enumerate(mu.maps):
            sel = which == j
            if np.any(sel):
                x[sel] = f.apply(x[sel])
    return x


def local_dimension_trace(mu_appendix: DistributionSpec, n_values, k_values=(1,), samples: int = 200_000,
                          seed: int = 0, burn_in: int = 64, x=None):
    """Mass of the shrinking neighbourhoods of each attracting angle.

    For atom ``n`` and power ``k`` the neighbourhood is the closed ball of
    half-width ``pi * (100 / 2**(2 n^2))**k`` around the attracting angle of
    ``A_n``; it contains ``f_n^k`` of the whole line, so its mass is at
    least ``2**(-n k)``.

    Returns
    -------
    list of dict
        Keys ``n, k, center, half_width, width, mass, floor, sigma, ratio,
        warning`` with ``ratio = log(mass) / log(width)``.
    """
    maps = mu_appendix.maps
    if x is None:
        x = sample_stationary(mu_appendix, samples, seed, burn_in)
    total = len(x)
    rows = []
    for n in n_values:
        if not 1 <= n <= len(maps):
            raise ConfigurationError(f"n={n} outside the truncation 1..{len(maps)}", key="n_values")
        f = maps[n - 1]
        assert isinstance(f, Moebius)
        center = f.attracting_angle()
        d = PROJECTIVE_LINE.distance(x, center)
        for k in k_values:
            hw = math.pi * (100.0 / 2.0 ** (2 * n * n)) ** k
            mass = float(np.count_nonzero(d <= hw)) / total if hw < PROJECTIVE_LINE.diameter else 1.0
            width = 2.0 * hw
            floor = 2.0 ** (-n * k)
            sigma = math.sqrt(floor * (1.0 - floor) / total)
            ratio = math.log(mass) / math.log(width) if mass > 0 else math.nan
            warning = ""
            if total * floor < MIN_EXPECTED_HITS:
                warning = "insufficient samples for the mass floor"
            rows.append(dict(n=n, k=k, center=center, half_width=hw, width=width, mass=mass,
                             floor=floor, sigma=sigma, ratio=ratio, warning=warning))
    return rows


def moment_table(n_max_values=range(1, 6), gamma: float = 0.1):
    """Rows ``(n_max, moment_gamma, log_moment, log_moment_limit)``."""
    rows = []
    for n in n_max_values:
        mu = appendix_a_family(n)
        rows.append(dict(n_max=n, gamma=gamma, moment=moment_gamma(mu, gamma),
                         log_moment=log_moment(mu), log_moment_limit=LOG_MOMENT_LIMIT))
    return rows
