"""Vectorised adaptive Gauss-Legendre quadrature on a set of panels."""
import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import NumericalError

_NODES, _WEIGHTS = leggauss(12)


def _rule(f, a, b):
    h = 0.5 * (b - a)
    c = 0.5 * (a + b)
    x = c[:, None] + h[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return (fx * _WEIGHTS).sum(axis=1) * h


def adaptive_gl(f, breaks, rtol=1e-10, atol=0.0, max_panels=20000):
    """Integrate ``f`` over ``[breaks[0], breaks[-1]]``.

    Each panel carries the 12-point rule on its two halves and the error
    estimate ``|left + right - whole|``.  While the summed estimate exceeds
    ``max(rtol * |I|, atol)`` the worst panels are bisected.  ``f`` must
    accept and return 1-D arrays.

    Returns
    -------
    value, error : float
        Integral and summed error estimate.

    Raises
    ------
    NumericalError
        When ``max_panels`` is reached before convergence.
    """
    br = np.asarray(breaks, dtype=float)
    a, b = br[:-1], br[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return 0.0, 0.0
    whole = _rule(f, a, b)
    m = 0.5 * (a + b)
    left = _rule(f, a, m)
    right = _rule(f, m, b)
    while True:
        fine = left + right
        err = np.abs(fine - whole)
        total = fine.sum()
        errsum = err.sum()
        target = max(rtol * abs(total), atol)
        if errsum <= target or not np.isfinite(total):
            if not np.isfinite(total):
                raise NumericalError("non-finite integrand value")
            return float(total), float(errsum)
        if a.size >= max_panels:
            raise NumericalError("adaptive quadrature exhausted its panel budget",
                                 achieved=errsum / max(abs(total), 1e-300))
        # bisect every panel carrying more than its share, and always the worst one
        split = err > target / a.size
        split[np.argmax(err)] = True
        ks = ~split
        sa, sb, sm = a[split], b[split], m[split]
        na = np.concatenate([sa, sm])
        nb = np.concatenate([sm, sb])
        nwhole = np.concatenate([left[split], right[split]])
        nm = 0.5 * (na + nb)
        nleft = _rule(f, na, nm)
        nright = _rule(f, nm, nb)
        a = np.concatenate([a[ks], na])
        b = np.concatenate([b[ks], nb])
        m = np.concatenate([m[ks], nm])
        whole = np.concatenate([whole[ks], nwhole])
        left = np.concatenate([left[ks], nleft])
        right = np.concatenate([right[ks], nright])
