import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ropekit.curve import (
    Component,
    CurveError,
    PolyLink,
    circumradius,
    random_rotation,
    resample,
    resample_count,
    tangent_circle_radius,
)
from ropekit.generators import perturbed, rolled_circle, simple_chain
from ropekit.thickness import normalize

SQUARE = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)]

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord, coord).map(np.array)


def test_circumradius_examples():
    assert circumradius((1, 0, 0), (0, 1, 0), (-1, 0, 0)) == pytest.approx(1.0, abs=1e-12)
    assert circumradius((0, 0, 0), (1, 0, 0), (2, 0, 0)) == math.inf
    # right triangle: hypotenuse is a diameter
    assert circumradius((0, 0, 0), (3, 0, 0), (0, 4, 0)) == pytest.approx(2.5)


def test_circumradius_rejects_repeated_point():
    with pytest.raises(CurveError):
        circumradius((0, 0, 0), (0, 0, 0), (1, 0, 0))


@given(point, point, point)
def test_circumradius_symmetric_and_bounded(x, y, z):
    d = [np.linalg.norm(x - y), np.linalg.norm(y - z), np.linalg.norm(x - z)]
    if min(d) < 1e-3:
        return
    r = circumradius(x, y, z)
    for perm in itertools.permutations((x, y, z)):
        rp = circumradius(*perm)
        if math.isinf(r):
            assert math.isinf(rp)
        else:
            assert rp == pytest.approx(r, rel=1e-12)
    assert r >= d[1] / 2 * (1 - 1e-12)


def test_tangent_circle_radius_examples():
    assert tangent_circle_radius((0, 0, 0), (1, 0, 0), (0, 2, 0)) == pytest.approx(1.0)
    assert tangent_circle_radius((0, 0, 0), (1, 0, 0), (1, 1, 0)) == pytest.approx(1.0)
    assert tangent_circle_radius((0, 0, 0), (1, 0, 0), (5, 0, 0)) == math.inf
    with pytest.raises(CurveError):
        tangent_circle_radius((0, 0, 0), (1, 0, 0), (0, 0, 0))


@given(point, point, point)
def test_tangent_radius_is_limit_of_circumradius(base, d, y):
    n = np.linalg.norm(d)
    if n < 1e-2 or np.linalg.norm(y - base) < 1e-1:
        return
    d = d / n
    perp = np.linalg.norm((y - base) - ((y - base) @ d) * d)
    if perp < 1e-2 * np.linalg.norm(y - base):
        return
    eps = 1e-5
    expect = tangent_circle_radius(base, d, y)
    assert circumradius(base, base + eps * d, y) == pytest.approx(expect, rel=1e-4)
    # symmetric secant removes the first-order term
    sym = circumradius(base - eps * d, base + eps * d, y)
    assert sym == pytest.approx(expect, rel=1e-6)


def test_component_validation():
    with pytest.raises(CurveError):
        Component([(0, 0, 0), (1, 0, 0)])
    with pytest.raises(CurveError):
        Component([(0, 0, 0), (0, 0, 0), (1, 0, 0)])
    with pytest.raises(CurveError):
        Component([(0, 0, 0), (1, 0, 0), (0, float("nan"), 0)])
    with pytest.raises(CurveError):
        PolyLink([])


def test_lengths():
    assert PolyLink([SQUARE]).length() == pytest.approx(4.0)
    for n in (3, 6, 100):
        assert rolled_circle(n).length() == pytest.approx(2 * n * math.sin(math.pi / n), rel=1e-12)
    chain = normalize(simple_chain(2).link)
    assert chain.length() == pytest.approx(8 * math.pi, rel=5e-3)


def test_resample_examples():
    sq = resample(PolyLink([SQUARE]), 0.5)
    assert len(sq[0]) == 8
    assert sq.length() == pytest.approx(4.0, abs=0.04)
    c = rolled_circle(1000)
    r = resample(c, c.length() / 100)
    assert len(r[0]) == 100
    assert r.length() == pytest.approx(c.length(), rel=5e-3)
    same = resample(c, c[0].edge_lengths()[0])
    assert abs(len(same[0]) - 1000) <= 1
    with pytest.raises(CurveError):
        resample(c, 100.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.5))
def test_resample_edges_never_exceed_arc_step(seed, frac):
    rng = np.random.default_rng(seed)
    comp = Component(rng.standard_normal((12, 3)))
    r = resample(comp, frac * comp.length() / 3)
    assert r[0].edge_lengths().max() <= comp.length() / len(r[0]) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 0.3), st.floats(0.02, 0.3))
def test_resample_length_change_bounded_on_smooth_curves(seed, amp, target):
    link = perturbed(rolled_circle(400), seed, amp)
    r = resample(link, target)
    assert abs(r.length() - link.length()) <= len(link) * target


def test_resample_count_keeps_first_vertex_and_orientation():
    c = rolled_circle(64)
    r = resample_count(c, 37)
    assert np.allclose(r[0].vertices[0], c[0].vertices[0])
    assert np.cross(r[0].vertices[0], r[0].vertices[1])[2] > 0


def test_transforms():
    rng = np.random.default_rng(1)
    q = random_rotation(rng)
    assert np.allclose(q @ q.T, np.eye(3)) and np.linalg.det(q) == pytest.approx(1.0)
    c = PolyLink([SQUARE])
    moved = c.transformed(q, (1, 2, 3), 2.0)
    assert moved.length() == pytest.approx(8.0)
    rev = c.reversed_component(0)
    assert np.allclose(rev[0].vertices[0], c[0].vertices[-1])


def test_point_at_wraps():
    c = PolyLink([SQUARE])[0]
    assert np.allclose(c.point_at(0.5), (0.5, 0, 0))
    assert np.allclose(c.point_at(4.5), (0.5, 0, 0))
    assert np.allclose(c.points_at([1.5, 3.5]), [(1, 0.5, 0), (0, 0.5, 0)])
