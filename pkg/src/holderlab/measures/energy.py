"""Kernel energies of atomic measures and their smoothed densities.

``energy_e`` is the double sum ``sum_ij w_i w_j U(d(x_i, x_j))`` with the
diagonal at ``U(0)``.  Up to a few thousand distinct atoms it is summed
exactly in fixed chunks.  Larger one-dimensional measures use a two-level
scheme on bins of width about ``epsilon / 16``:

* pairs in the same or adjacent bins are summed exactly from the sorted
  atoms;
* all other bin pairs interact through a bin-averaged kernel, evaluated
  with one FFT convolution (circular on periodic charts, zero-padded on the
  interval).

The far-field kernel between bins ``k`` apart is the triangle-weighted
average of ``U(|k + s| h)`` over ``s`` in ``[-1, 1]``, which is exact for
atoms spread uniformly inside their bins.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import ConfigurationError, NumericalError
from ..kernels import KernelParams, KernelTable, _phi, u_eval, u_zero
from .core import ParticleMeasure

__all__ = [
    "EnergyValue",
    "DensityGrid",
    "energy_e",
    "rho_grid",
    "energy_te",
    "theta_grid",
    "default_grid_points",
    "EXACT_ATOM_LIMIT",
]

EXACT_ATOM_LIMIT = 4096
_CHUNK = 1024
_MAX_BINS = 1 << 22
_COLLISION = 1e-14
_TG, _TW = leggauss(8)


@dataclass(frozen=True)
class EnergyValue:
    """Pair energy ``e`` and/or grid energy ``te`` of one measure."""

    e: float | None
    params: KernelParams
    te: float | None = None
    method: str = "exact"

    def __float__(self):
        return float(self.e)


def _params_for(table: KernelTable, epsilon, space):
    if table.k != space.dimension:
        raise ConfigurationError(
            f"kernel table is for k={table.k} but {space.kind} has dimension {space.dimension}", key="k"
        )
    return KernelParams(table.alpha, float(epsilon), table.k)


def energy_e(nu: ParticleMeasure, table: KernelTable, epsilon: float, method: str = "auto",
             exact_limit: int = EXACT_ATOM_LIMIT) -> EnergyValue:
    """Kernel energy ``E(nu) = sum_ij w_i w_j U_eps(d(x_i, x_j))``.

    Parameters
    ----------
    nu : ParticleMeasure
    table : KernelTable
        Table for the measure's dimension.
    epsilon : float
        Cut-off length.
    method : {"auto", "exact", "binned"}
        ``auto`` sums exactly when the measure has at most ``exact_limit``
        distinct atoms or lives on the disk.
    """
    params = _params_for(table, epsilon, nu.space)
    m = nu.merged()
    if len(m) == 1:
        return EnergyValue(u_zero(params), params, method="exact")
    use_exact = method == "exact" or (method == "auto" and (len(m) <= exact_limit or m.space.dimension == 2))
    if method not in ("auto", "exact", "binned"):
        raise ConfigurationError(f"unknown energy method {method!r}", key="method")
    if use_exact:
        return EnergyValue(_exact_energy(m, table, epsilon), params, method="exact")
    if m.space.dimension != 1:
        raise ConfigurationError("binned energy is available on one-dimensional spaces only", key="method")
    return EnergyValue(_binned_energy(m, table, epsilon), params, method="binned")


def _exact_energy(m: ParticleMeasure, table, epsilon):
    x, w = m.points, m.weights
    n = len(w)
    parts = []
    for s in range(0, n, _CHUNK):
        d = m.space.distance(x[s:s + _CHUNK, None], x[None, :])
        parts.append(w[s:s + _CHUNK] @ (u_eval(table, epsilon, d) @ w))
    return float(np.sum(parts))


def _binned_energy(m: ParticleMeasure, table, epsilon):
    space = m.space
    x, w = m.points, m.weights
    n = len(x)
    length = space.extent
    nb = int(min(_MAX_BINS, max(16, np.ceil(16.0 * length / epsilon))))
    h = length / nb
    b = np.minimum((x / h).astype(np.int64), nb - 1)
    periodic = space.periodic

    # near field: sorted atoms, pairs at bin offset 0 or 1 (forward, wrapping once)
    near = np.sum(w * w) * u_eval(table, epsilon, 0.0)
    active = np.arange(n)
    pair_sum = []
    for step in range(1, n):
        j = active + step
        wrapped = j >= n
        if not periodic:
            keep = ~wrapped
            active, j, wrapped = active[keep], j[keep], wrapped[keep]
        j = np.where(wrapped, j - n, j)
        gap = b[j] - b[active] + np.where(wrapped, nb, 0)
        keep = gap <= 1
        if not np.any(keep):
            break
        active, j = active[keep], j[keep]
        d = space.distance(x[active], x[j])
        pair_sum.append(np.sum(w[active] * w[j] * u_eval(table, epsilon, d)))
    near += 2.0 * float(np.sum(pair_sum))

    # far field on bin masses
    mass = np.bincount(b, weights=w, minlength=nb)
    if periodic:
        k = np.arange(nb)
        off = np.minimum(k, nb - k)
        kern = _bin_kernel(off, h, table, epsilon, length)
        conv = np.fft.irfft(np.fft.rfft(mass) * np.fft.rfft(kern), nb)
    else:
        size = 2 * nb
        k = np.arange(size)
        off = np.where(k < nb, k, size - k)
        kern = _bin_kernel(off, h, table, epsilon, None)
        kern[nb] = 0.0
        conv = np.fft.irfft(np.fft.rfft(mass, size) * np.fft.rfft(kern), size)[:nb]
    far = float(mass @ conv)
    return near + far


def _bin_kernel(off, h, table, epsilon, period):
    # triangle-weighted mean of U over the offset between two uniform bins
    off = off.astype(float)
    s = np.concatenate([0.5 * (_TG - 1.0), 0.5 * (_TG + 1.0)])
    wt = np.concatenate([0.5 * _TW * (1.0 - np.abs(0.5 * (_TG - 1.0))),
                         0.5 * _TW * (1.0 - np.abs(0.5 * (_TG + 1.0)))])
    d = np.abs(off[:, None] + s[None, :]) * h
    if period is not None:
        d = np.mod(d, period)
        d = np.minimum(d, period - d)
    kern = (u_eval(table, epsilon, d) * wt).sum(axis=1)
    kern[off <= 1] = 0.0
    return kern


# grid densities ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Values of a density on midpoint-grid nodes.

    ``kind`` is ``"rho"`` for the unnormalised smoothing ``rho`` and
    ``"theta"`` for the probability density ``rho**2 / te``.
    """

    space: object
    nodes: np.ndarray
    cell_volumes: np.ndarray
    values: np.ndarray
    kind: str = "rho"

    def integral(self) -> float:
        return float(np.sum(self.values * self.cell_volumes))

    def as_measure(self) -> ParticleMeasure:
        """Atomic measure at the nodes with masses ``value * cell volume``."""
        if self.kind != "theta":
            raise ConfigurationError("only theta grids are probability densities", key="kind")
        m = self.values * self.cell_volumes
        return ParticleMeasure(self.space, self.nodes, m / m.sum())

    def to_rows(self):
        if self.nodes.ndim == 1:
            return [(float(a), float(c), float(v)) for a, c, v in zip(self.nodes, self.cell_volumes, self.values)]
        return [(float(a[0]), float(a[1]), float(c), float(v))
                for a, c, v in zip(self.nodes, self.cell_volumes, self.values)]

    def csv_header(self):
        coords = ["x"] if self.nodes.ndim == 1 else ["x", "y"]
        return coords + ["cell_volume", "value"]


def default_grid_points(space, epsilon) -> int:
    """Cells per axis so that the cell width is about ``epsilon / 128``."""
    n = int(np.ceil(128.0 * (space.extent if space.dimension == 1 else 2.0) / epsilon))
    cap = 1 << 21 if space.dimension == 1 else 2048
    return int(min(max(n, 256), cap))


def rho_grid(nu: ParticleMeasure, params: KernelParams, grid_points=None) -> DensityGrid:
    """``rho(y) = sum_i w_i phi(d(x_i, y))`` on the midpoint grid.

    Raises
    ------
    NumericalError
        If an atom lies within ``1e-14`` of a grid node.
    """
    space = nu.space
    if params.k != space.dimension:
        raise ConfigurationError(f"kernel dimension {params.k} does not match {space.kind}", key="k")
    g = default_grid_points(space, params.epsilon) if grid_points is None else int(grid_points)
    nodes, vol = space.midpoint_grid(g)
    vals = np.zeros(len(nodes))
    step = max(1, 2_000_000 // max(len(nu), 1))
    for s in range(0, len(nodes), step):
        d = space.distance(nodes[s:s + step, None], nu.points[None, :])
        if np.any(d < _COLLISION):
            raise NumericalError("grid node coincides with an atom; change grid_points")
        vals[s:s + step] = _phi(d, params.alpha, params.epsilon, params.k) @ nu.weights
    return DensityGrid(space, nodes, vol, vals, "rho")


def energy_te(nu: ParticleMeasure, params: KernelParams, grid_points=None) -> EnergyValue:
    """Grid energy ``te = sum_g rho_g**2 * vol_g``."""
    rho = rho_grid(nu, params, grid_points)
    te = float(np.sum(rho.values**2 * rho.cell_volumes))
    return EnergyValue(e=None, params=params, te=te, method="grid")


def theta_grid(nu: ParticleMeasure, params: KernelParams, grid_points=None) -> DensityGrid:
    """Probability density ``rho**2 / te`` on the grid."""
    rho = rho_grid(nu, params, grid_points)
    sq = rho.values**2
    te = np.sum(sq * rho.cell_volumes)
    return DensityGrid(nu.space, rho.nodes, rho.cell_volumes, sq / te, "theta")
