"""Energy traces along the iteration, contraction fits and the
scale-threshold regularity check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import ConfigurationError
from ..kernels import KernelParams, KernelTable, u_zero
from ..measures import ParticleMeasure, energy_e
from .holder import holder_constant, sup_ball_mass
from .reports import CheckReport
from .stationary import iterate_measures

__all__ = [
    "EnergyTrace",
    "fit_contraction",
    "ContractionRateEstimator",
    "energy_trace",
    "scale_threshold_check",
]


def fit_contraction(values, plateau_fraction: float = 1 / 3, plateau_tol: float = 0.05):
    """Fit ``E_j ~ C_tilde + (E_0 - C_tilde) lambda**j`` to a trace.

    ``C_tilde`` is the mean of the trailing ``plateau_fraction`` of the
    trace.  ``lambda`` is ``exp`` of the least-squares slope of
    ``log(E_j - C_tilde)`` over the initial strictly decreasing run, cut
    where ``E_j`` comes within ``plateau_tol * C_tilde`` of the plateau.

    Returns
    -------
    lam : float or None
        None when no contraction is detected.
    c_tilde : float
    window : tuple of int
        Half-open index range used for the slope.
    """
    e = np.asarray(values, dtype=float)
    if e.ndim != 1 or e.size < 2:
        raise ConfigurationError("an energy trace needs at least two values", key="steps")
    m = max(2, int(math.ceil(plateau_fraction * e.size)))
    m = min(m, e.size)
    c_tilde = float(np.mean(e[-m:]))
    end = 1
    while end < e.size and e[end] < e[end - 1] and e[end] - c_tilde > plateau_tol * c_tilde:
        end += 1
    if end < 2 or e[0] - c_tilde <= 0:
        return None, c_tilde, (0, end)
    j = np.arange(end)
    slope, _ = np.polyfit(j, np.log(e[:end] - c_tilde), 1)
    if not slope < 0:
        return None, c_tilde, (0, end)
    return float(np.exp(slope)), c_tilde, (0, end)


class ContractionRateEstimator(BaseEstimator):
    """Contraction factor and plateau of an energy trace.

    Parameters
    ----------
    plateau_fraction : float, default=1/3
        Trailing share of the trace averaged into ``C_tilde_``.
    plateau_tol : float, default=0.05
        Relative closeness to the plateau that ends the fit window.
    """

    def __init__(self, plateau_fraction=1 / 3, plateau_tol=0.05):
        self.plateau_fraction = plateau_fraction
        self.plateau_tol = plateau_tol

    def fit(self, X, y=None):
        e = check_array(X, ensure_2d=False, dtype=float).ravel()
        lam, c, window = fit_contraction(e, self.plateau_fraction, self.plateau_tol)
        self.lambda_ = lam
        self.C_tilde_ = c
        self.fit_window_ = window
        self.converged_ = lam is not None
        self.E0_ = float(e[0])
        return self

    def predict(self, steps):
        """Model energy ``C_tilde + (E_0 - C_tilde) lambda**j``."""
        check_is_fitted(self, "C_tilde_")
        j = np.asarray(steps, dtype=float)
        lam = self.lambda_ if self.converged_ else 1.0
        return self.C_tilde_ + (self.E0_ - self.C_tilde_) * lam**j


@dataclass
class EnergyTrace:
    """Energies ``E_0 .. E_n`` of the iterates and their contraction fit."""

    params: KernelParams
    values: np.ndarray
    lam: float | None
    C_tilde: float
    fit_window: tuple
    methods: list = field(default_factory=list)
    measures: list | None = None

    @property
    def converged(self) -> bool:
        return self.lam is not None

    @property
    def kappa(self) -> float | None:
        """Scale threshold base ``lambda ** (1 / alpha)``."""
        return None if self.lam is None else self.lam ** (1.0 / self.params.alpha)

    def to_rows(self):
        return [(j, float(v), m) for j, (v, m) in enumerate(zip(self.values, self.methods))]


def energy_trace(mu, nu0: ParticleMeasure, table: KernelTable, epsilon: float, steps: int,
                 mode: str = "exact", seed: int = 0, n_particles=None, keep_measures: bool = False,
                 plateau_fraction: float = 1 / 3, plateau_tol: float = 0.05) -> EnergyTrace:
    """Energies along ``nu_j = mu * nu_{j-1}`` for ``j = 0 .. steps``."""
    if int(steps) < 2:
        raise ConfigurationError("energy traces need steps >= 2", key="steps")
    params = KernelParams(table.alpha, epsilon, table.k)
    vals, methods, kept = [], [], []
    for nu in iterate_measures(mu, nu0, steps, mode, seed, n_particles):
        ev = energy_e(nu, table, epsilon)
        vals.append(ev.e)
        methods.append(ev.method)
        if keep_measures:
            kept.append(nu)
    vals = np.array(vals)
    lam, c_tilde, window = fit_contraction(vals, plateau_fraction, plateau_tol)
    return EnergyTrace(params, vals, lam, c_tilde, window, methods, kept if keep_measures else None)


def scale_threshold_check(mu, nu0: ParticleMeasure, alpha: float, steps_range, kappa: float, C=None,
                          centers=None, seed: int = 0, mode: str = "montecarlo",
                          n_particles=None, n_scales: int = 32, measures=None) -> CheckReport:
    """Check ``sup_x nu_n(B_r(x)) < C r**alpha`` for all ``r > kappa**n``.

    Parameters
    ----------
    mu, nu0 :
        System and initial measure; iterates are simulated unless
        ``measures`` maps each ``n`` to ``nu_n``.
    alpha : float
        Hölder exponent under test.
    steps_range : iterable of int
        Step counts ``n``.  With ``C=None`` the smallest one calibrates
        ``C`` and is not itself tested: ``C`` is then the least constant
        that bounds that step on every radius in ``(kappa**n, diameter]``,
        see :func:`holder_constant`.
    kappa : float
        Scale threshold base in ``(0, 1)``.
    n_scales : int
        Radii per step, log-spaced in ``(kappa**n, diameter]``.
    centers : str or array_like, optional
        Ball centres; defaults to ``"exact"`` on 1-D spaces and
        ``"atoms+grid"`` on the disk.

    Returns
    -------
    CheckReport
        ``max_residual`` is the largest ``sup mass / (C r**alpha)``; the
        check passes when it is at most one.
    """
    if not 0.0 < kappa < 1.0:
        raise ConfigurationError("kappa must lie in (0, 1)", key="kappa")
    ns = sorted(int(n) for n in steps_range)
    if not ns:
        raise ConfigurationError("empty steps range", key="steps")
    space = nu0.space
    if measures is None:
        keep = set(ns)
        measures = {}
        for j, nu in enumerate(iterate_measures(mu, nu0, ns[-1], mode, seed, n_particles)):
            if j in keep:
                measures[j] = nu
    diam = space.diameter
    if centers is None:
        centers = "exact" if space.dimension == 1 else "atoms+grid"

    def radii(n):
        lo = kappa**n
        if lo >= diam:
            return np.array([])
        return np.geomspace(lo, diam, n_scales + 1)[1:]

    tested = ns
    calibrated = C is None
    calibration = None
    if calibrated:
        n0 = ns[0]
        if kappa**n0 >= diam:
            raise ConfigurationError("calibration step has an empty scale range", key="calibrate_step")
        C, calibration = holder_constant(measures[n0], alpha, kappa**n0, diam)
        tested = ns[1:]
    rows = []
    worst = 0.0
    for n in tested:
        r = radii(n)
        if r.size == 0:
            continue
        s = sup_ball_mass(measures[n], r, centers)
        ratio = s / (C * r**alpha)
        worst = max(worst, float(ratio.max()))
        rows.extend((n, float(ri), float(si), float(C * ri**alpha), float(qi)) for ri, si, qi in zip(r, s, ratio))
    details = {"C": C, "calibrated": calibrated, "calibration": calibration, "kappa": kappa, "alpha": alpha,
               "violations": int(sum(1 for row in rows if row[4] > 1.0)), "tested_steps": tested}
    return CheckReport("scale_threshold", len(rows), worst, 1.0, details, rows)
