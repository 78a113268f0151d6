import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from holderlab import _quadrature
from holderlab.errors import ConfigurationError, DomainError, NumericalError
from holderlab.kernels import (
    GridSpec,
    KernelParams,
    build_kernel_table,
    c_alpha_limit,
    load_or_build_table,
    phi_eval,
    u_eval,
    u_reference,
    u_zero,
    zero_constant,
)

# Riemann sum on [-1e6, 1e6] with a log-graded mesh around both centres and
# the analytic second-order tail beyond 1e6; computed once and frozen
C_ALPHA_RIEMANN_K1_A025 = 16.56745649501278


def riesz_constant(alpha, k):
    """Closed form of the tail constant via Riesz potential composition."""
    a = (k - alpha) / 2

    def g(s):
        return math.pi ** (k / 2) * 2**s * gamma(s / 2) / gamma((k - s) / 2)

    return g(a) ** 2 / g(k - alpha)


# --- phi ---------------------------------------------------------------------


def test_phi_examples():
    assert phi_eval(KernelParams(0.3, 0.5, 1), 1.0) == 1.0
    assert phi_eval(KernelParams(0.2, 0.25, 1), 0.0625) == pytest.approx(4.0, rel=1e-12)
    assert phi_eval(KernelParams(0.2, 0.25, 1), 0.0) == math.inf


def test_phi_rejects_negative_distance():
    with pytest.raises(DomainError):
        phi_eval(KernelParams(0.2, 0.1), -1e-3)


@settings(max_examples=100, deadline=None)
@given(alpha=st.floats(0.01, 0.49), eps=st.floats(1e-6, 1e3), k=st.sampled_from([1, 2]))
def test_phi_continuous_at_cutoff(alpha, eps, k):
    p = KernelParams(alpha, eps, k)
    below = phi_eval(p, np.nextafter(eps, 0))
    assert phi_eval(p, eps) == pytest.approx(below, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(alpha=st.floats(0.01, 0.49), eps=st.floats(1e-4, 1e2), r=st.floats(1e-8, 1e4), k=st.sampled_from([1, 2]))
def test_phi_sandwich(alpha, eps, r, k):
    v = phi_eval(KernelParams(alpha, eps, k), r)
    upper = r ** (-(k + alpha) / 2)
    lower = min(upper, eps**-alpha * r ** (-(k - alpha) / 2))
    assert lower * (1 - 1e-12) <= v <= upper * (1 + 1e-12)


def test_params_validation_names_key():
    with pytest.raises(ConfigurationError) as e:
        KernelParams(0.5, 1e-3)
    assert e.value.key == "alpha"
    with pytest.raises(ConfigurationError) as e:
        KernelParams(0.2, 0.0)
    assert e.value.key == "epsilon"
    with pytest.raises(ConfigurationError) as e:
        KernelParams(0.2, 1e-3, 3)
    assert e.value.key == "k"


# --- U at the origin and far away -------------------------------------------


def test_u_zero_examples():
    assert u_zero(KernelParams(0.25, 1.0, 1)) == 16.0
    assert u_zero(KernelParams(0.4, 1.0, 2)) == pytest.approx(10 * math.pi, rel=1e-15)
    assert zero_constant(1) == 4.0
    assert zero_constant(2) == pytest.approx(4 * math.pi, rel=1e-15)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.4])
def test_u_reference_zero_matches_closed_form(alpha, k):
    p = KernelParams(alpha, 1e-3, k)
    assert u_reference(p, 0.0) == pytest.approx(u_zero(p), rel=1e-8)


def test_c_alpha_against_riemann_oracle():
    assert c_alpha_limit(0.25, 1) == pytest.approx(C_ALPHA_RIEMANN_K1_A025, rel=1e-4)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("alpha", [0.05, 0.2, 0.45])
def test_c_alpha_against_riesz_closed_form(alpha, k):
    assert c_alpha_limit(alpha, k) == pytest.approx(riesz_constant(alpha, k), rel=1e-6)


def test_u_reference_scaling():
    a, k = 0.3, 1
    base = u_reference(KernelParams(a, 1.0, k), 0.7)
    scaled = u_reference(KernelParams(a, 0.01, k), 0.007)
    assert scaled == pytest.approx(0.01**-a * base, rel=1e-7)


# --- tables ------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2])
def test_table_invariants(tables, k):
    t = tables(0.2, k)
    assert np.all(np.diff(t.values) < 0)
    assert np.all(t.values < t.u_zero)
    assert t.c_alpha_prime == t.values[np.flatnonzero(t.grid == 1.0)[0]]
    assert abs(t.tail_defect) < 0.05
    # the tail constant bounds U from above for r >= eps
    big = t.grid >= 1.0
    assert np.all(t.values[big] <= t.c_alpha * t.grid[big] ** -t.alpha * (1 + 1e-9))


@pytest.mark.parametrize("k", [1, 2])
def test_u_eval_matches_reference(tables, k):
    alpha = 0.2
    t = tables(alpha, k)
    gen = np.random.default_rng(7 + k)
    eps = 10 ** gen.uniform(-4, -1, 200)
    r = eps * 10 ** gen.uniform(-3.5, 3.5, 200)
    fast = u_eval(t, eps, r)
    ref = np.array([u_reference(KernelParams(alpha, e, k), x) for e, x in zip(eps, r)])
    assert np.max(np.abs(fast - ref) / ref) <= 1e-4


def test_u_eval_exact_at_zero(tables):
    t = tables(0.2, 1)
    for eps in (1e-4, 1e-3, 0.37):
        assert u_eval(t, eps, 0.0) == u_zero(KernelParams(0.2, eps, 1))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=20), st.floats(1e-4, 1.0))
def test_u_eval_monotone_in_r(tables, rs, eps):
    rs = np.sort(rs)
    v = u_eval(tables(0.2, 1), eps, rs)
    assert np.all(np.diff(v) <= 1e-12 * v[:-1])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-4, 1.0), min_size=2, max_size=20), st.floats(0.0, 2.0))
def test_u_eval_decreasing_in_eps(tables, eps, r):
    eps = np.sort(eps)
    v = u_eval(tables(0.2, 1), eps, r)
    assert np.all(np.diff(v) <= 1e-12 * v[:-1])


def test_u_eval_rejects_bad_input(tables):
    t = tables(0.2, 1)
    with pytest.raises(DomainError):
        u_eval(t, 1e-3, -0.1)
    with pytest.raises(ConfigurationError):
        u_eval(t, 0.0, 0.1)


def test_cache_round_trip(tmp_path):
    spec = GridSpec(1e-2, 1e2, 64)
    built, hit = load_or_build_table(0.3, 1, spec, cache_dir=tmp_path)
    assert not hit
    again, hit = load_or_build_table(0.3, 1, spec, cache_dir=tmp_path)
    assert hit
    assert np.array_equal(built.grid, again.grid)
    assert np.array_equal(built.values, again.values)
    assert (built.u_zero, built.c_alpha, built.c_alpha_prime) == (again.u_zero, again.c_alpha, again.c_alpha_prime)
    r = np.linspace(0, 3, 50)
    assert np.array_equal(u_eval(built, 0.1, r), u_eval(again, 0.1, r))


def test_build_does_not_depend_on_workers():
    spec = GridSpec(1e-1, 1e1, 64)
    one = build_kernel_table(0.3, 1, spec)
    two = build_kernel_table(0.3, 1, spec, workers=2)
    assert np.array_equal(one.values, two.values)


def test_grid_spec_validation():
    with pytest.raises(ConfigurationError):
        GridSpec(2.0, 10.0, 128)
    with pytest.raises(ConfigurationError):
        GridSpec(1e-2, 1e2, 10)
    assert 1.0 in GridSpec(1e-3, 1e5, 100).nodes()


def test_quadrature_budget_exhausted():
    with pytest.raises(NumericalError):
        _quadrature.adaptive_gl(lambda x: np.abs(x) ** -0.99, [0.0, 1.0], rtol=1e-14, max_panels=50)


def test_quadrature_polynomial_exact():
    v, _ = _quadrature.adaptive_gl(lambda x: 3 * x**2, [0.0, 2.0])
    assert v == pytest.approx(8.0, rel=1e-14)
