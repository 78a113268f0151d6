import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderlab.errors import ConfigurationError, NumericalError, ResourceError, UnsupportedOperationError
from holderlab.kernels import KernelParams, phi_eval, u_eval
from holderlab.measures import (
    ParticleMeasure,
    ball_mass,
    cesaro_average,
    convolve_step,
    energy_e,
    energy_te,
    pushforward,
    rho_grid,
    theta_grid,
    tv_binned,
    wasserstein1d,
)
from holderlab.spaces import CIRCLE, DISK, INTERVAL, PROJECTIVE_LINE
from holderlab.systems import Affine1D, DistributionSpec, Moebius, Rotation

BERNOULLI = DistributionSpec(((Affine1D(0.5, 0.0), 0.5), (Affine1D(0.5, 0.5), 0.5)))


def weighted(space, pts, w=None):
    return ParticleMeasure(space, np.asarray(pts, dtype=float), w)


def test_measure_validation():
    with pytest.raises(ConfigurationError):
        weighted(INTERVAL, [0.1, 0.2], [0.5, 0.6])
    with pytest.raises(ConfigurationError):
        weighted(INTERVAL, [0.1, 0.2], [1.5, -0.5])
    with pytest.raises(ConfigurationError):
        weighted(INTERVAL, [], None)


def test_merged_combines_coincident_atoms():
    m = weighted(INTERVAL, [0.5, 0.1, 0.5], [0.25, 0.5, 0.25]).merged()
    assert m.points.tolist() == [0.1, 0.5]
    assert m.weights.tolist() == [0.5, 0.5]


def test_csv_round_trip(tmp_path):
    from holderlab.reporting import write_csv

    nu = weighted(CIRCLE, [0.1, 0.7, 0.3], [0.2, 0.3, 0.5])
    path = write_csv(tmp_path / "m.csv", nu.csv_header(), nu.to_rows())
    back = ParticleMeasure.from_csv(path, CIRCLE)
    assert np.array_equal(back.points, nu.points)
    assert np.array_equal(back.weights, nu.weights)


# --- push-forward and convolution --------------------------------------------


def test_pushforward_examples():
    nu = weighted(INTERVAL, [0.0, 1.0])
    out = pushforward(Affine1D(0.5, 0.25), nu)
    assert out.points.tolist() == [0.25, 0.75]
    assert out.weights.tolist() == [0.5, 0.5]
    same = pushforward(Affine1D(1.0, 0.0), nu)
    assert np.array_equal(same.points, nu.points)


def test_pushforward_space_mismatch():
    with pytest.raises(ConfigurationError):
        pushforward(Rotation(0.1), weighted(INTERVAL, [0.3]))


def test_convolve_examples():
    nu = weighted(INTERVAL, [0.2, 0.6], [0.3, 0.7])
    single = DistributionSpec(((Affine1D(0.5, 0.1), 1.0),))
    a, b = convolve_step(single, nu), pushforward(single.maps[0], nu)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)
    two = convolve_step(BERNOULLI, ParticleMeasure.dirac(INTERVAL, 0.4))
    assert sorted(two.points.tolist()) == [0.2, 0.7]
    assert two.weights.tolist() == [0.5, 0.5]


def test_convolve_exact_preserves_mass():
    nu = weighted(INTERVAL, np.linspace(0, 1, 7), np.arange(1, 8) / 28)
    for _ in range(5):
        nu = convolve_step(BERNOULLI, nu)
        assert math.fsum(nu.weights) == pytest.approx(1.0, abs=1e-15)


def test_convolve_exact_cap():
    with pytest.raises(ResourceError):
        convolve_step(BERNOULLI, ParticleMeasure.uniform(INTERVAL, 100), cap=150)


def test_montecarlo_deterministic():
    nu = ParticleMeasure.uniform(INTERVAL, 10)
    a = convolve_step(BERNOULLI, nu, "montecarlo", 1000, seed=3, step=2)
    b = convolve_step(BERNOULLI, nu, "montecarlo", 1000, seed=3, step=2)
    c = convolve_step(BERNOULLI, nu, "montecarlo", 1000, seed=4, step=2)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_montecarlo_bernoulli_is_uniform():
    nu = ParticleMeasure.dirac(INTERVAL, 0.0)
    n = 100_000
    for step in range(20):
        nu = convolve_step(BERNOULLI, nu, "montecarlo", n, seed=99, step=step)
    x = np.sort(nu.points)
    ecdf_hi = np.arange(1, n + 1) / n
    ks = max(np.max(ecdf_hi - x), np.max(x - (ecdf_hi - 1 / n)))
    assert ks < 0.01


def test_cesaro_examples():
    d1, d2 = ParticleMeasure.dirac(CIRCLE, 0.1), ParticleMeasure.dirac(CIRCLE, 0.6)
    mix = cesaro_average([d1, d2])
    assert mix.points.tolist() == [0.1, 0.6] and mix.weights.tolist() == [0.5, 0.5]
    one = cesaro_average([d1])
    assert one.points.tolist() == [0.1]
    with pytest.raises(ConfigurationError):
        cesaro_average([])


# --- ball mass ---------------------------------------------------------------


def test_ball_mass_examples():
    nu = weighted(INTERVAL, [0.125, 0.375, 0.625, 0.875])
    assert ball_mass(nu, 0.5, 0.25) == 0.5
    d = ParticleMeasure.dirac(CIRCLE, 0.3)
    assert ball_mass(d, 0.3, 0.0) == 1.0
    assert ball_mass(d, 0.3, 0.2) == 1.0
    assert ball_mass(nu, 0.0, 1.0) == 1.0


def test_ball_mass_periodic_wraps():
    nu = weighted(CIRCLE, [0.05, 0.95, 0.5])
    assert ball_mass(nu, 0.0, 0.06) == pytest.approx(2 / 3)
    assert ball_mass(nu, 0.0, 0.5) == 1.0


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([INTERVAL, CIRCLE, PROJECTIVE_LINE, DISK]), st.integers(0, 2**32 - 1))
def test_ball_mass_matches_direct_scan(space, seed):
    gen = np.random.default_rng(seed)
    nu = _random_measure(gen, space, 40)
    c = nu.points[gen.integers(len(nu))] if gen.uniform() < 0.5 else _random_measure(gen, space, 1).points[0]
    r = gen.uniform(0, space.diameter)
    direct = nu.weights[space.distance(nu.points, c) <= r].sum()
    assert ball_mass(nu, c, r) == pytest.approx(direct, abs=1e-12)


def _random_measure(gen, space, n):
    if space.dimension == 2:
        rad, ang = np.sqrt(gen.uniform(size=n)), gen.uniform(0, 2 * np.pi, n)
        pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    else:
        pts = gen.uniform(0, space.extent, n)
    w = gen.uniform(0.1, 1.0, n)
    return ParticleMeasure(space, pts, w / w.sum())


# --- energies ----------------------------------------------------------------


def test_energy_examples(tables):
    t = tables(0.25, 1)
    eps = 1e-3
    assert energy_e(ParticleMeasure.dirac(INTERVAL, 0.3), t, eps).e == 16.0 * eps**-0.25
    pair = weighted(INTERVAL, [0.2, 0.5])
    want = 0.5 * u_eval(t, eps, 0.0) + 0.5 * u_eval(t, eps, 0.3)
    assert energy_e(pair, t, eps).e == pytest.approx(want, rel=1e-13)


def test_energy_dimension_mismatch(tables):
    with pytest.raises(ConfigurationError):
        energy_e(ParticleMeasure.dirac(DISK, (0.0, 0.0)), tables(0.25, 1), 1e-3)


@pytest.mark.parametrize("space", [INTERVAL, CIRCLE, PROJECTIVE_LINE])
def test_binned_energy_matches_exact(tables, space):
    t = tables(0.2, 1)
    gen = np.random.default_rng(17)
    nu = _random_measure(gen, space, 6000)
    for eps in (1e-3, 3e-2):
        exact = energy_e(nu, t, eps, method="exact").e
        binned = energy_e(nu, t, eps).e
        assert energy_e(nu, t, eps).method == "binned"
        assert binned == pytest.approx(exact, rel=1e-4)


def test_markov_and_holder_from_energy(tables):
    alpha = 0.2
    t = tables(alpha, 1)
    gen = np.random.default_rng(21)
    markov_bad = holder_bad = 0
    for i in range(1000):
        space = (INTERVAL, CIRCLE, PROJECTIVE_LINE)[i % 3]
        nu = _random_measure(gen, space, int(gen.integers(1, 30)))
        eps = 10 ** gen.uniform(-3, -1)
        e = energy_e(nu, t, eps).e
        y = gen.uniform(0, space.extent)
        r = gen.uniform(0, space.diameter)
        m = ball_mass(nu, y, r)
        markov_bad += e < u_eval(t, eps, 2 * r) * m * m * (1 - 1e-12)
        r = gen.uniform(eps, space.diameter)
        m = ball_mass(nu, y, r)
        holder_bad += m > math.sqrt(e * 2**alpha / t.c_alpha_prime) * r ** (alpha / 2) * (1 + 1e-12)
    assert markov_bad == 0
    assert holder_bad == 0


def test_te_cluster_close_to_e(tables):
    alpha, eps = 0.25, 1e-3
    gen = np.random.default_rng(5)
    nu = weighted(INTERVAL, 0.5 + gen.uniform(-1e-4, 1e-4, 10))
    params = KernelParams(alpha, eps, 1)
    e = energy_e(nu, tables(alpha, 1), eps).e
    te = energy_te(nu, params).te
    assert 0.8 < te / e < 1.25


def test_te_diffuse_close_to_e(tables):
    alpha, eps = 0.25, 0.1
    nu = ParticleMeasure.uniform(INTERVAL, 1000)
    e = energy_e(nu, tables(alpha, 1), eps).e
    te = energy_te(nu, KernelParams(alpha, eps, 1)).te
    assert 1 / 3 < te / e < 3


def test_te_quadratic_in_mass():
    params = KernelParams(0.3, 0.01, 1)
    rho = rho_grid(weighted(CIRCLE, [0.1, 0.4]), params, 512)
    te = np.sum(rho.values**2 * rho.cell_volumes)
    assert np.sum((2 * rho.values) ** 2 * rho.cell_volumes) == pytest.approx(4 * te, rel=1e-15)


def test_rho_examples():
    params = KernelParams(0.3, 0.01, 1)
    rho = rho_grid(ParticleMeasure.dirac(INTERVAL, 0.3001), params, 256)
    assert np.allclose(rho.values, phi_eval(params, np.abs(rho.nodes - 0.3001)), rtol=1e-14)
    gen = np.random.default_rng(2)
    a, b = _random_measure(gen, INTERVAL, 5), _random_measure(gen, INTERVAL, 7)
    mix = ParticleMeasure(INTERVAL, np.concatenate([a.points, b.points]),
                          np.concatenate([0.3 * a.weights, 0.7 * b.weights]))
    lin = 0.3 * rho_grid(a, params, 256).values + 0.7 * rho_grid(b, params, 256).values
    assert np.allclose(rho_grid(mix, params, 256).values, lin, rtol=1e-12)
    assert np.all(rho_grid(a, params, 256).values >= phi_eval(params, INTERVAL.diameter))


def test_rho_collision_raises():
    # 256 midpoints on [0, 1] sit at (i + 1/2) / 256
    with pytest.raises(NumericalError):
        rho_grid(ParticleMeasure.dirac(INTERVAL, 0.5 / 256), KernelParams(0.3, 0.01, 1), 256)


@pytest.mark.parametrize("space", [INTERVAL, CIRCLE, PROJECTIVE_LINE, DISK])
def test_theta_normalised(space):
    gen = np.random.default_rng(8)
    nu = _random_measure(gen, space, 12)
    th = theta_grid(nu, KernelParams(0.2, 0.05, space.dimension), 300 if space.dimension == 1 else 96)
    assert th.integral() == pytest.approx(1.0, abs=1e-9)
    m = th.as_measure()
    assert math.fsum(m.weights) == pytest.approx(1.0, abs=1e-12)


def test_theta_dirac_and_symmetry():
    params = KernelParams(0.2, 0.02, 1)
    th = theta_grid(ParticleMeasure.dirac(CIRCLE, 0.3001), params, 400)
    phi2 = phi_eval(params, CIRCLE.distance(th.nodes, 0.3001)) ** 2
    assert np.allclose(th.values / phi2, (th.values / phi2)[0], rtol=1e-12)
    # atoms at 0.25 and 0.75 are swapped by the isometry x -> 1 - x, which maps
    # the midpoint grid onto itself in reverse
    th = theta_grid(weighted(CIRCLE, [0.25 + 1e-4, 0.75 - 1e-4]), params, 400)
    assert np.allclose(th.values, th.values[::-1], rtol=1e-9)


# --- distances ---------------------------------------------------------------


def test_wasserstein_examples():
    a = weighted(INTERVAL, [0.0, 0.5])
    b = weighted(INTERVAL, [0.25, 0.75])
    assert wasserstein1d(a, b) == pytest.approx(0.25, abs=1e-15)
    assert wasserstein1d(a, a) == 0.0
    x, y = ParticleMeasure.dirac(CIRCLE, 0.1), ParticleMeasure.dirac(CIRCLE, 0.9)
    assert wasserstein1d(x, y) == pytest.approx(0.2, abs=1e-15)
    x, y = ParticleMeasure.dirac(PROJECTIVE_LINE, 0.1), ParticleMeasure.dirac(PROJECTIVE_LINE, 3.0)
    assert wasserstein1d(x, y) == pytest.approx(PROJECTIVE_LINE.distance(0.1, 3.0), abs=1e-15)


def test_wasserstein_disk_unsupported():
    d = ParticleMeasure.dirac(DISK, (0.0, 0.0))
    with pytest.raises(UnsupportedOperationError):
        wasserstein1d(d, d)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_wasserstein_rotation_invariant(seed):
    gen = np.random.default_rng(seed)
    a, b = _random_measure(gen, CIRCLE, 8), _random_measure(gen, CIRCLE, 5)
    f = Rotation(float(gen.uniform()))
    assert wasserstein1d(pushforward(f, a), pushforward(f, b)) == pytest.approx(wasserstein1d(a, b), abs=1e-12)


def test_tv_examples():
    a, b = ParticleMeasure.dirac(INTERVAL, 0.1), ParticleMeasure.dirac(INTERVAL, 0.9)
    assert tv_binned(a, a, 8) == 0.0
    assert tv_binned(a, b, 8) == 1.0
    half = weighted(INTERVAL, [0.1, 0.9])
    assert tv_binned(half, a, 8) == 0.5
    with pytest.raises(ConfigurationError):
        tv_binned(a, b, 0)


def test_moebius_pushforward_keeps_space():
    nu = ParticleMeasure.uniform(PROJECTIVE_LINE, 5)
    out = pushforward(Moebius(np.diag([2.0, 0.5])), nu)
    assert out.space.kind == "rp1" and np.all(out.points < math.pi)
