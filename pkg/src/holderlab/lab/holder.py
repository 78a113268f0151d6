"""Sup-ball-mass profiles and Hölder exponent fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import ConfigurationError
from ..measures import ParticleMeasure, ball_mass
from ..spaces import get_space

__all__ = [
    "HolderProfile",
    "holder_profile",
    "sup_ball_mass",
    "window_sup_mass",
    "holder_constant",
    "fit_power_law",
    "HolderExponentEstimator",
]

DEFAULT_GRID_CENTERS = 512
EXACT_PAIR_LIMIT = 4096


@dataclass
class HolderProfile:
    """Largest ball mass per radius and the fitted power law ``C r**alpha``."""

    scales: np.ndarray
    sup_masses: np.ndarray
    alpha_hat: float
    C_hat: float
    degenerate: bool = False

    def to_rows(self):
        return [(float(r), float(s)) for r, s in zip(self.scales, self.sup_masses)]


def _centers(nu: ParticleMeasure, spec, n_grid):
    space = nu.space
    if isinstance(spec, str):
        parts = set(spec.replace(" ", "").split("+"))
        if not parts <= {"atoms", "grid"}:
            raise ConfigurationError(f"unknown centers spec {spec!r}", key="centers")
        chunks = []
        if "atoms" in parts:
            chunks.append(np.unique(nu.points, axis=0 if space.dimension == 2 else None))
        if "grid" in parts:
            chunks.append(space.uniform_points(n_grid))
        return np.concatenate(chunks)
    return space.validate(spec)


def _extended(nu: ParticleMeasure):
    # sorted atoms and cumulative weights, unrolled once around the circle
    x, cw = nu._sorted
    if nu.space.periodic:
        x = np.concatenate([x, x + nu.space.period])
        cw = np.concatenate([cw, 1.0 + cw[1:]])
    return x, cw


def window_sup_mass(nu: ParticleMeasure, scales):
    """Exact ``sup_x nu(B_r(x))`` over all centres of a 1-D space.

    A closed ball of radius ``r`` can always be slid until its left end
    meets an atom, so the sup is the largest mass of a window
    ``[x_i, x_i + 2r]``.
    """
    if nu.space.dimension != 1:
        raise ConfigurationError("exact window sup needs a 1-D space", key="centers")
    n = len(nu._sorted[0])
    x, cw = _extended(nu)
    out = np.empty(len(scales))
    for i, r in enumerate(scales):
        r = float(r)
        if nu.space.periodic and 2 * r >= nu.space.period:
            out[i] = 1.0
            continue
        hi = np.searchsorted(x, x[:n] + 2 * r, side="right")
        out[i] = np.max(cw[hi] - cw[:n])
    return np.clip(out, 0.0, 1.0)


def holder_constant(nu: ParticleMeasure, alpha: float, r_min: float, r_max: float, n_dense: int = 4096):
    """Smallest ``C`` with ``sup_x nu(B_r(x)) <= C r**alpha`` on ``(r_min, r_max]``.

    The sup mass is a step function of ``r`` jumping at half the gaps
    between atoms, so for at most ``EXACT_PAIR_LIMIT`` distinct atoms on a
    1-D space the bound is taken over every window exactly.  Otherwise a
    dense log grid of ``n_dense`` radii is used.

    Returns
    -------
    C : float
    method : {"exact", "grid"}
    """
    if not 0 <= r_min < r_max:
        raise ConfigurationError("need 0 <= r_min < r_max", key="scales")
    if nu.space.dimension == 1:
        m = nu.merged()
        n = len(m)
        if n <= EXACT_PAIR_LIMIT:
            x, cw = _extended(m)
            best = 0.0
            for i in range(n):
                j = np.arange(i, i + n) if m.space.periodic else np.arange(i, n)
                half = 0.5 * (x[j] - x[i])
                keep = half <= r_max
                r = np.maximum(half[keep], r_min)
                if r[0] == 0.0:
                    raise ConfigurationError("r_min must be positive for an atomic measure", key="kappa")
                best = max(best, float(np.max((cw[j[keep] + 1] - cw[i]) / r**alpha)))
            if m.space.periodic and 2 * r_max >= m.space.period:
                best = max(best, 1.0 / r_max**alpha)
            return best, "exact"
        lo = max(r_min, r_max * 1e-300)
        radii = np.geomspace(lo, r_max, n_dense)
        return float(np.max(window_sup_mass(m, radii) / radii**alpha)), "grid"
    lo = max(r_min, r_max * 1e-300)
    radii = np.geomspace(lo, r_max, n_dense)
    return float(np.max(sup_ball_mass(nu, radii) / radii**alpha)), "grid"


def sup_ball_mass(nu: ParticleMeasure, scales, centers="atoms+grid", n_grid: int = DEFAULT_GRID_CENTERS):
    """``max_x nu(B_r(x))`` over the chosen centres, for each radius.

    ``centers="exact"`` takes the sup over every centre (1-D only).
    """
    if isinstance(centers, str) and centers == "exact":
        return window_sup_mass(nu, scales)
    c = _centers(nu, centers, n_grid)
    out = np.empty(len(scales))
    for i, r in enumerate(scales):
        out[i] = np.max(ball_mass(nu, c, float(r)))
    return out


def fit_power_law(scales, masses):
    """Least-squares slope and prefactor of ``log s`` against ``log r``.

    Returns ``(alpha_hat, C_hat, degenerate)``; a constant profile is
    degenerate and gets ``alpha_hat = 0``.
    """
    lr = np.log(np.asarray(scales, dtype=float))
    ls = np.log(np.asarray(masses, dtype=float))
    if np.ptp(ls) == 0.0:
        return 0.0, float(np.exp(ls[0])), True
    slope, intercept = np.polyfit(lr, ls, 1)
    return float(slope), float(np.exp(intercept)), False


def holder_profile(nu: ParticleMeasure, scales, centers="atoms+grid",
                   n_grid: int = DEFAULT_GRID_CENTERS) -> HolderProfile:
    """Sup ball masses at ``scales`` and their power-law fit.

    Parameters
    ----------
    nu : ParticleMeasure
    scales : array_like
        Positive, ascending radii.
    centers : {"atoms", "grid", "atoms+grid"} or array_like
        Ball centres; the grid has ``n_grid`` evenly spread points.
    """
    r = np.asarray(scales, dtype=float)
    if r.ndim != 1 or r.size < 2 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ConfigurationError("scales must be positive, ascending, at least two", key="scales")
    s = sup_ball_mass(nu, r, centers, n_grid)
    alpha_hat, c_hat, degenerate = fit_power_law(r, s)
    return HolderProfile(r, s, alpha_hat, c_hat, degenerate)


class HolderExponentEstimator(BaseEstimator):
    """Estimate the Hölder exponent of an atomic measure from its samples.

    Parameters
    ----------
    space : str, default="interval"
        Space name.
    scales : array_like, optional
        Radii of the profile; defaults to 16 log-spaced radii in
        ``[0.01, 0.25] * diameter``.
    centers : str, default="atoms+grid"
    n_grid : int, default=512

    Attributes
    ----------
    alpha_hat_ : float
    C_hat_ : float
    profile_ : HolderProfile

    Examples
    --------
    >>> import numpy as np
    >>> x = (np.arange(4096) + 0.5) / 4096
    >>> est = HolderExponentEstimator().fit(x)
    >>> 0.9 < est.alpha_hat_ < 1.1
    True
    """

    def __init__(self, space="interval", scales=None, centers="atoms+grid", n_grid=DEFAULT_GRID_CENTERS):
        self.space = space
        self.scales = scales
        self.centers = centers
        self.n_grid = n_grid

    def _scales(self, space):
        if self.scales is not None:
            return np.asarray(self.scales, dtype=float)
        return np.geomspace(0.01, 0.25, 16) * space.diameter

    def fit(self, X, y=None, sample_weight=None):
        space = get_space(self.space)
        X = check_array(X, ensure_2d=False, dtype=float)
        if space.dimension == 1 and X.ndim == 2:
            X = X[:, 0]
        w = None
        if sample_weight is not None:
            w = np.asarray(sample_weight, dtype=float)
            w = w / w.sum()
        nu = ParticleMeasure(space, X, w)
        self.profile_ = holder_profile(nu, self._scales(space), self.centers, self.n_grid)
        self.alpha_hat_ = self.profile_.alpha_hat
        self.C_hat_ = self.profile_.C_hat
        self.degenerate_ = self.profile_.degenerate
        return self

    def predict(self, r):
        """Fitted sup ball mass ``C_hat * r ** alpha_hat``."""
        check_is_fitted(self, "alpha_hat_")
        r = np.asarray(r, dtype=float)
        return np.minimum(1.0, self.C_hat_ * r**self.alpha_hat_)
