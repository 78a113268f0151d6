"""Compact metric spaces supported by the laboratory.

Four charts are available:

===============  ========================  ========  ==========
kind             chart                     diameter  total Leb
===============  ========================  ========  ==========
circle           R/Z, coordinate in [0,1)  1/2       1
rp1              angle in [0, pi)          pi/2      pi
interval         [0, 1]                    1         1
disk             closed unit disk in R^2   2         pi
===============  ========================  ========  ==========

One-dimensional points are stored as float arrays of shape ``(n,)`` and
disk points as arrays of shape ``(n, 2)``.  Balls are closed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "SpaceDescriptor",
    "CIRCLE",
    "PROJECTIVE_LINE",
    "INTERVAL",
    "DISK",
    "get_space",
    "distance",
    "lebesgue_total",
]

# slack for chart membership; beyond it a coordinate is rejected
_CHART_TOL = 1e-12
_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True)
class SpaceDescriptor:
    """A compact metric space with a fixed coordinate chart.

    Attributes
    ----------
    kind : str
        One of ``"circle"``, ``"rp1"``, ``"interval"``, ``"disk"``.
    dimension : int
        Topological dimension ``k``.
    diameter : float
        Largest distance between two points.
    lebesgue : float
        Total Lebesgue measure in the chart.
    period : float or None
        Length of the fundamental domain for periodic charts.
    coordinate_convention : str
        Short description of the chart.
    """

    kind: str
    dimension: int
    diameter: float
    lebesgue: float
    period: float | None
    coordinate_convention: str

    @property
    def periodic(self) -> bool:
        return self.period is not None

    @property
    def extent(self) -> float:
        """Length of the one-dimensional chart."""
        if self.dimension != 1:
            raise DomainError(f"{self.kind} has no one-dimensional extent")
        return self.period if self.periodic else 1.0

    def validate(self, points) -> np.ndarray:
        """Return points as a float array in canonical chart form.

        Periodic coordinates within the slack of the period are wrapped back
        into ``[0, period)``.

        Raises
        ------
        DomainError
            If any coordinate is non-finite or outside the chart.
        """
        x = np.asarray(points, dtype=float)
        if self.dimension == 1:
            if x.ndim > 1:
                if x.ndim == 2 and x.shape[1] == 1:
                    x = x[:, 0]
                else:
                    raise DomainError(f"{self.kind} points must be scalars")
        else:
            if x.ndim == 1 and x.shape == (2,):
                x = x[None, :]
            if x.ndim != 2 or x.shape[1] != 2:
                raise DomainError("disk points must have shape (n, 2)")
        if not np.all(np.isfinite(x)):
            raise DomainError(f"non-finite coordinate for {self.kind}")
        if self.kind == "disk":
            if np.any(np.einsum("...i,...i->...", x, x) > (1.0 + _CHART_TOL) ** 2):
                raise DomainError("point outside the closed unit disk")
            return x
        hi = self.period if self.periodic else 1.0
        if np.any(x < -_CHART_TOL) or np.any(x > hi + _CHART_TOL):
            raise DomainError(f"coordinate outside the {self.kind} chart [0, {hi:g}]")
        if self.periodic:
            return self.wrap(x)
        return np.clip(x, 0.0, 1.0)

    def wrap(self, x):
        """Reduce periodic coordinates into ``[0, period)``."""
        if not self.periodic:
            return x
        p = self.period
        y = np.mod(x, p)
        # mod of a tiny negative number can round up to the period itself
        return np.where(y >= p, 0.0, y)

    def distance(self, x, y):
        """Metric distance, broadcasting over leading axes.

        Inputs are assumed to be valid chart coordinates; use
        :func:`distance` for a checked variant.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "disk":
            return np.sqrt(np.sum((x - y) ** 2, axis=-1))
        d = np.abs(x - y)
        if self.periodic:
            d = np.minimum(d, self.period - d)
        return d

    def uniform_points(self, n: int) -> np.ndarray:
        """Deterministic, evenly spread points (cell midpoints, or a
        sunflower spiral on the disk)."""
        n = int(n)
        if n < 1:
            raise ConfigurationError("need at least one point", key="uniform")
        i = np.arange(n, dtype=float) + 0.5
        if self.kind == "disk":
            rad = np.sqrt(i / n)
            ang = _GOLDEN_ANGLE * i
            return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        return i * (self.extent / n)

    def midpoint_grid(self, n: int):
        """Midpoint quadrature grid.

        Parameters
        ----------
        n : int
            Cells per axis.

        Returns
        -------
        nodes : ndarray
            Cell centres; ``(n,)`` in 1-D, ``(m, 2)`` on the disk where only
            centres inside the disk are kept.
        volumes : ndarray
            Cell volumes, one per node.
        """
        n = int(n)
        if n < 1:
            raise ConfigurationError("grid needs at least one cell", key="grid_points")
        if self.dimension == 1:
            h = self.extent / n
            return (np.arange(n) + 0.5) * h, np.full(n, h)
        h = 2.0 / n
        c = -1.0 + (np.arange(n) + 0.5) * h
        xx, yy = np.meshgrid(c, c, indexing="ij")
        inside = xx**2 + yy**2 <= 1.0
        nodes = np.column_stack([xx[inside], yy[inside]])
        return nodes, np.full(len(nodes), h * h)

    def bin_index(self, points, bins: int) -> np.ndarray:
        """Index of the uniform bin containing each point (row-major on the
        disk's bounding square)."""
        x = np.asarray(points, dtype=float)
        if self.dimension == 1:
            idx = np.floor(x / self.extent * bins).astype(np.int64)
            return np.clip(idx, 0, bins - 1)
        ij = np.floor((x + 1.0) / 2.0 * bins).astype(np.int64)
        ij = np.clip(ij, 0, bins - 1)
        return ij[:, 0] * bins + ij[:, 1]

    def __str__(self):
        return self.kind


CIRCLE = SpaceDescriptor("circle", 1, 0.5, 1.0, 1.0, "R/Z with coordinate in [0, 1)")
PROJECTIVE_LINE = SpaceDescriptor(
    "rp1", 1, np.pi / 2, np.pi, np.pi, "angle of a line through the origin, in [0, pi)"
)
INTERVAL = SpaceDescriptor("interval", 1, 1.0, 1.0, None, "[0, 1]")
DISK = SpaceDescriptor("disk", 2, 2.0, np.pi, None, "closed unit disk {|x| <= 1} in R^2")

_CATALOG = {
    "circle": CIRCLE,
    "rp1": PROJECTIVE_LINE,
    "projectiveline": PROJECTIVE_LINE,
    "projective_line": PROJECTIVE_LINE,
    "interval": INTERVAL,
    "disk": DISK,
}


def get_space(name) -> SpaceDescriptor:
    """Look up a space by name (``circle``, ``rp1``, ``interval``, ``disk``)."""
    if isinstance(name, SpaceDescriptor):
        return name
    try:
        return _CATALOG[str(name).strip().lower()]
    except KeyError:
        raise ConfigurationError(
            f"unknown space {name!r}; expected one of circle, rp1, interval, disk",
            key="space",
        ) from None


def distance(space, x, y):
    """Checked distance between chart points ``x`` and ``y``.

    Examples
    --------
    >>> round(float(distance(CIRCLE, 0.1, 0.9)), 12)
    0.2
    """
    space = get_space(space)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xs = space.validate(np.atleast_1d(x) if space.dimension == 1 else x)
    ys = space.validate(np.atleast_1d(y) if space.dimension == 1 else y)
    d = space.distance(xs, ys)
    if space.dimension == 1 and x.ndim == 0 and y.ndim == 0:
        return float(d[0])
    if space.dimension == 2 and x.ndim == 1 and y.ndim == 1:
        return float(d[0])
    return d


def lebesgue_total(space) -> float:
    return get_space(space).lebesgue
