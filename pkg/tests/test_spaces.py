import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderlab.errors import ConfigurationError, DomainError
from holderlab.spaces import CIRCLE, DISK, INTERVAL, PROJECTIVE_LINE, distance, get_space, lebesgue_total

SPACES = [CIRCLE, PROJECTIVE_LINE, INTERVAL, DISK]


def sample(space, rng, n):
    if space.dimension == 2:
        rad = np.sqrt(rng.uniform(size=n))
        ang = rng.uniform(0, 2 * np.pi, size=n)
        return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return rng.uniform(0, space.extent, size=n) * (1 - 1e-15)


def test_distance_examples():
    assert distance(CIRCLE, 0.1, 0.9) == pytest.approx(0.2, abs=1e-15)
    assert distance(PROJECTIVE_LINE, 0.1, 3.0) == pytest.approx(math.pi - 2.9, abs=1e-15)
    for space in SPACES:
        x = sample(space, np.random.default_rng(0), 1)[0]
        assert float(distance(space, x, x)) == 0.0


def test_lebesgue_totals():
    assert lebesgue_total(CIRCLE) == 1.0
    assert lebesgue_total(PROJECTIVE_LINE) == pytest.approx(math.pi)
    assert lebesgue_total(INTERVAL) == 1.0
    assert lebesgue_total(DISK) == pytest.approx(math.pi)


def test_diameters():
    assert CIRCLE.diameter == 0.5
    assert PROJECTIVE_LINE.diameter == pytest.approx(math.pi / 2)
    assert INTERVAL.diameter == 1.0
    assert DISK.diameter == 2.0


@pytest.mark.parametrize("space", SPACES, ids=str)
def test_metric_axioms_on_random_triples(space):
    rng = np.random.default_rng(1)
    x, y, z = (sample(space, rng, 10_000) for _ in range(3))
    dxy, dyz, dxz = space.distance(x, y), space.distance(y, z), space.distance(x, z)
    assert np.all(dxy >= 0)
    assert np.array_equal(dxy, space.distance(y, x))
    assert np.all(dxz <= dxy + dyz + 1e-12)
    assert np.all(dxy <= space.diameter + 1e-15)


@given(st.floats(0, 1), st.floats(0, 1))
def test_circle_distance_matches_wraparound_formula(a, b):
    d = abs(a - b)
    assert math.isclose(float(CIRCLE.distance(a, b)), min(d, 1 - d), abs_tol=1e-15)


@settings(max_examples=200)
@given(st.floats(-1e-13, math.pi + 1e-13))
def test_projective_chart_wraps_into_fundamental_domain(x):
    y = PROJECTIVE_LINE.validate([x])
    assert 0.0 <= y[0] < math.pi


def test_out_of_chart_is_a_domain_error():
    with pytest.raises(DomainError):
        INTERVAL.validate([1.5])
    with pytest.raises(DomainError):
        DISK.validate([[1.0, 1.0]])
    with pytest.raises(DomainError):
        distance(CIRCLE, 0.2, 1.7)
    with pytest.raises(DomainError):
        CIRCLE.validate([np.nan])


def test_unknown_space_names_the_key():
    with pytest.raises(ConfigurationError, match="space"):
        get_space("torus")
    assert get_space("RP1") is PROJECTIVE_LINE


def test_midpoint_grids_cover_the_space():
    for space in (CIRCLE, PROJECTIVE_LINE, INTERVAL):
        nodes, vol = space.midpoint_grid(64)
        assert vol.sum() == pytest.approx(space.lebesgue)
        assert np.all(np.diff(nodes) > 0)
    nodes, vol = DISK.midpoint_grid(400)
    assert vol.sum() == pytest.approx(math.pi, rel=1e-2)
    assert np.all(np.sum(nodes**2, axis=1) <= 1)


def test_uniform_points_inside_chart():
    for space in SPACES:
        pts = space.uniform_points(101)
        space.validate(pts)
