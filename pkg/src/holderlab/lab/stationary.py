"""Iterating the averaged push-forward towards a stationary measure."""
from __future__ import annotations

from ..errors import ConfigurationError
from ..measures import ParticleMeasure, cesaro_average, convolve_step
from ..systems import DistributionSpec


def _schedule(mu, steps):
    if isinstance(mu, DistributionSpec):
        return [mu] * steps
    mus = list(mu)
    if len(mus) < steps:
        raise ConfigurationError(f"per-step distribution list has {len(mus)} entries, need {steps}",
                                 key="distribution")
    return mus[:steps]


def iterate_measures(mu, nu0: ParticleMeasure, steps: int, mode: str = "exact", seed: int = 0,
                     n_particles=None, cap=None):
    """Yield ``nu_0, nu_1, ..., nu_steps`` with ``nu_j = mu_j * nu_{j-1}``.

    ``mu`` is one distribution or a list with one distribution per step.
    Step ``j`` draws from counter substream ``j``.
    """
    steps = int(steps)
    kw = {} if cap is None else {"cap": cap}
    nu = nu0
    yield nu
    for j, mj in enumerate(_schedule(mu, steps), start=1):
        nu = convolve_step(mj, nu, mode=mode, n_particles=n_particles, seed=seed, step=j, **kw)
        yield nu


def stationary_estimate(mu, nu0: ParticleMeasure, steps: int, mode: str = "exact", cesaro: bool = False,
                        seed: int = 0, n_particles=None, cap=None) -> ParticleMeasure:
    """Approximate a stationary measure by ``steps`` convolution steps.

    Returns ``nu_steps``, or with ``cesaro=True`` the average of
    ``nu_0 .. nu_{steps-1}``.
    """
    if int(steps) < 1:
        raise ConfigurationError("steps must be at least 1", key="steps")
    it = iterate_measures(mu, nu0, steps, mode, seed, n_particles, cap)
    if not cesaro:
        for nu in it:
            pass
        return nu
    history = [nu for j, nu in enumerate(it) if j < steps]
    return cesaro_average(history)
