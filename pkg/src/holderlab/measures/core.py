"""Weighted atomic measures and the one-step averaged push-forward."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ConfigurationError, ResourceError
from ..rng import uniforms
from ..spaces import SpaceDescriptor, get_space
from ..systems import DistributionSpec, MapDescriptor, sample_indices

__all__ = [
    "ParticleMeasure",
    "pushforward",
    "convolve_step",
    "cesaro_average",
    "ball_mass",
    "DEFAULT_EXACT_CAP",
]

DEFAULT_EXACT_CAP = 10**7
_MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ParticleMeasure:
    """Probability measure ``sum_i w_i delta_{x_i}`` on a space.

    Parameters
    ----------
    space : SpaceDescriptor or str
    points : array_like
        ``(n,)`` for one-dimensional spaces, ``(n, 2)`` on the disk.
    weights : array_like, optional
        Non-negative, summing to one.  Defaults to equal weights.
    """

    space: SpaceDescriptor
    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        space = get_space(self.space)
        pts = space.validate(self.points)
        n = len(pts)
        if n == 0:
            raise ConfigurationError("a measure needs at least one atom", key="initial_measure")
        w = np.full(n, 1.0 / n) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if w.shape != (n,):
            raise ConfigurationError("points and weights differ in length", key="weights")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ConfigurationError("weights must be finite and non-negative", key="weights")
        total = math.fsum(w)
        if abs(total - 1.0) > _MASS_TOL:
            raise ConfigurationError(f"weights sum to {total!r}, not 1", key="weights")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, space, x):
        space = get_space(space)
        pts = np.array([x], dtype=float) if space.dimension == 1 else np.array([x], dtype=float).reshape(1, 2)
        return cls(space, pts, np.ones(1))

    @classmethod
    def uniform(cls, space, n):
        """Equal weights on the evenly spread points of the space."""
        space = get_space(space)
        return cls(space, space.uniform_points(n))

    def __len__(self):
        return len(self.weights)

    @cached_property
    def _sorted(self):
        order = np.argsort(self.points, kind="stable")
        x = self.points[order]
        cw = np.concatenate([[0.0], np.cumsum(self.weights[order])])
        return x, cw

    def merged(self) -> "ParticleMeasure":
        """Same measure with coincident atoms combined (sorted in 1-D)."""
        axis = 0 if self.space.dimension == 2 else None
        pts, inv = np.unique(self.points, axis=axis, return_inverse=True)
        if len(pts) == len(self.points):
            if self.space.dimension == 1:
                order = np.argsort(self.points, kind="stable")
                return ParticleMeasure(self.space, self.points[order], self.weights[order])
            return self
        w = np.bincount(inv.ravel(), weights=self.weights, minlength=len(pts))
        return ParticleMeasure(self.space, pts, w / math.fsum(w))

    def to_rows(self):
        if self.space.dimension == 1:
            return [(float(x), float(w)) for x, w in zip(self.points, self.weights)]
        return [(float(p[0]), float(p[1]), float(w)) for p, w in zip(self.points, self.weights)]

    def csv_header(self):
        return ["x", "weight"] if self.space.dimension == 1 else ["x", "y", "weight"]

    @classmethod
    def from_csv(cls, path, space):
        """Read a measure written with columns ``(coord..., weight)``."""
        space = get_space(space)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ConfigurationError(f"empty measure file {path}", key="initial_measure")
        body = rows[1:] if not _is_number(rows[0][0]) else rows
        try:
            data = np.array([[float(v) for v in row] for row in body if row], dtype=float)
        except ValueError as exc:
            raise ConfigurationError(f"unreadable measure file {path}: {exc}", key="initial_measure") from None
        ncol = space.dimension + 1
        if data.ndim != 2 or data.shape[1] != ncol:
            raise ConfigurationError(f"measure file needs {ncol} columns", key="initial_measure")
        pts = data[:, 0] if space.dimension == 1 else data[:, :2]
        w = data[:, -1]
        return cls(space, pts, w / math.fsum(w))


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def _check_space(f: MapDescriptor, nu: ParticleMeasure):
    if f.target_space.kind != nu.space.kind:
        raise ConfigurationError(
            f"map acts on {f.target_space.kind} but the measure lives on {nu.space.kind}", key="space"
        )


def pushforward(f: MapDescriptor, nu: ParticleMeasure) -> ParticleMeasure:
    """Image measure ``f_* nu``: atoms move, weights stay."""
    _check_space(f, nu)
    return ParticleMeasure(nu.space, f.apply(nu.points), nu.weights)


def convolve_step(mu: DistributionSpec, nu: ParticleMeasure, mode: str = "exact", n_particles=None,
                  seed: int = 0, step: int = 0, cap: int = DEFAULT_EXACT_CAP) -> ParticleMeasure:
    """One step of the averaged push-forward ``mu * nu``.

    Parameters
    ----------
    mu : DistributionSpec
    nu : ParticleMeasure
    mode : {"exact", "montecarlo"}
        ``exact`` keeps every pair ``(f_j(x_i), p_j w_i)``.  ``montecarlo``
        returns ``n_particles`` equal-weight atoms, each drawn as
        ``x ~ nu`` followed by ``f ~ mu``.
    n_particles : int, optional
        Monte Carlo sample size; defaults to ``len(nu)``.
    seed, step : int
        Counter coordinates of the draws.  Particle ``p`` uses lanes 0 (parent)
        and 1 (map) of ``(seed, step, p)``.
    cap : int
        Maximum number of atoms produced in exact mode.

    Raises
    ------
    ResourceError
        If exact mode would exceed ``cap`` atoms.
    """
    for f in mu.maps:
        _check_space(f, nu)
    if mode == "exact":
        size = len(mu) * len(nu)
        if size > cap:
            raise ResourceError(f"exact convolution needs {size} atoms (cap {cap}); use montecarlo mode")
        pts = [f.apply(nu.points) for f in mu.maps]
        w = [p * nu.weights for p in mu.probabilities]
        return ParticleMeasure(nu.space, np.concatenate(pts), np.concatenate(w))
    if mode != "montecarlo":
        raise ConfigurationError(f"unknown mode {mode!r}", key="mode")
    n = len(nu) if n_particles is None else int(n_particles)
    if n < 1:
        raise ConfigurationError("need at least one particle", key="particles")
    idx = np.arange(n, dtype=np.uint64)
    cdf = np.cumsum(nu.weights)
    cdf[-1] = 1.0
    parent = np.minimum(np.searchsorted(cdf, uniforms(seed, step, idx, 0), side="right"), len(cdf) - 1)
    which = sample_indices(mu, uniforms(seed, step, idx, 1))
    src = nu.points[parent]
    out = np.empty_like(src)
    for j, f in enumerate(mu.maps):
        sel = which == j
        if np.any(sel):
            out[sel] = f.apply(src[sel])
    return ParticleMeasure(nu.space, out, np.full(n, 1.0 / n))


def cesaro_average(measures) -> ParticleMeasure:
    """Equal-weight mixture ``(1/k) sum_j nu_j``."""
    measures = list(measures)
    if not measures:
        raise ConfigurationError("cesaro average of an empty list", key="steps")
    space = measures[0].space
    if any(m.space.kind != space.kind for m in measures):
        raise ConfigurationError("measures live on different spaces", key="space")
    k = len(measures)
    pts = np.concatenate([m.points for m in measures])
    w = np.concatenate([m.weights for m in measures]) / k
    return ParticleMeasure(space, pts, w / math.fsum(w))


def ball_mass(nu: ParticleMeasure, center, r):
    """Mass of the closed ball ``{y : d(y, center) <= r}``.

    ``center`` and ``r`` broadcast against each other; one-dimensional
    spaces use a sorted cumulative sum, the disk a direct scan.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ConfigurationError("ball radius must be non-negative", key="scales")
    space = nu.space
    if space.dimension == 2:
        c = np.asarray(center, dtype=float).reshape(-1, 2)
        rr = np.broadcast_to(r, (len(c),)) if r.ndim == 0 else r
        out = np.empty(len(c))
        for i in range(len(c)):
            d = space.distance(nu.points, c[i])
            out[i] = nu.weights[d <= rr[i]].sum()
        return float(out[0]) if np.ndim(center) == 1 and r.ndim == 0 else out
    c = np.asarray(center, dtype=float)
    c, r = np.broadcast_arrays(c, r)
    x, cw = nu._sorted
    if space.periodic:
        p = space.period
        lo, hi = c - r, c + r

        def cum(y, side):
            q = np.floor(y / p)
            rem = y - q * p
            return q + cw[np.searchsorted(x, rem, side=side)]

        mass = cum(hi, "right") - cum(lo, "left")
        mass = np.where(2 * r >= p, 1.0, mass)
    else:
        mass = cw[np.searchsorted(x, c + r, side="right")] - cw[np.searchsorted(x, c - r, side="left")]
    mass = np.clip(mass, 0.0, 1.0)
    return float(mass) if mass.ndim == 0 else mass
