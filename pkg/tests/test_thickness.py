import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ropekit.curve import ArcPosition, CurveError, PolyLink, random_rotation, resample_count
from ropekit.generators import perturbed, rolled_circle, simple_chain, trefoil_symmetric
from ropekit.thickness import (
    WitnessKind,
    doubly_critical_self_distance,
    local_thickness,
    min_distance_between,
    min_rad,
    normalize,
    ropelength,
    thickness,
    thickness_bruteforce,
    thickness_value,
)

SQUARE = PolyLink([[(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)]])


def test_min_rad_examples():
    assert min_rad(rolled_circle(360))[0] == pytest.approx(math.cos(math.pi / 360), rel=1e-12)
    assert min_rad(rolled_circle(360))[0] == pytest.approx(0.99996, abs=1e-5)
    assert min_rad(SQUARE)[0] == pytest.approx(0.5)


def test_min_rad_reversal_is_zero():
    spike = PolyLink([[(0, 0, 0), (2, 0, 0), (1, 0, 0), (1, 1, 0)]])
    assert min_rad(spike)[0] == 0.0


def test_chain_min_rad_not_active():
    chain = simple_chain(2).link
    rep = thickness(chain)
    assert rep.minrad_value >= 1.0
    assert rep.witness_kind is WitnessKind.DOUBLY_CRITICAL_CHORD


def test_dcsd_examples():
    t = 2 * math.pi * np.arange(200) / 200
    ring = np.c_[np.cos(t), np.sin(t), np.zeros_like(t)]
    two = PolyLink([ring, ring + (0, 0, 3)])
    d, (a, b) = doubly_critical_self_distance(two, scope="inter")
    assert d == pytest.approx(3.0, abs=1e-12)
    assert a.component != b.component
    d, _ = doubly_critical_self_distance(rolled_circle(360))
    assert d == pytest.approx(2.0, abs=1e-3)
    d, _ = doubly_critical_self_distance(simple_chain(2).link)
    assert d == pytest.approx(2.0, rel=5e-3)


def test_dcsd_without_candidates():
    tri = PolyLink([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]])
    assert doubly_critical_self_distance(tri)[0] == math.inf


def test_report_consistency():
    rep = thickness(trefoil_symmetric(128))
    assert rep.thickness == pytest.approx(min(rep.minrad_value, rep.dcsd_value / 2))
    assert rep.ropelength == pytest.approx(rep.length / rep.thickness)
    d = rep.as_dict()
    assert d["witness_kind"] == rep.witness_kind.value


def test_unit_circle():
    rep = thickness(rolled_circle(1000))
    assert rep.thickness == pytest.approx(1.0, abs=1e-3)
    assert rep.ropelength == pytest.approx(2 * math.pi, abs=1e-2)


def test_bruteforce_examples():
    assert thickness_bruteforce(rolled_circle(200)) == pytest.approx(1.0, abs=1e-3)
    # equal edges: the regime in which the two estimators must agree
    link = resample_count(perturbed(rolled_circle(4000), seed=7, amplitude=0.1), 200)
    assert thickness_value(link) == pytest.approx(thickness_bruteforce(link), rel=1e-3)
    with pytest.raises(CurveError):
        PolyLink([[(0, 0, 0), (0, 0, 0), (1, 0, 0)]])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_fast_never_exceeds_oracle(seed):
    link = perturbed(rolled_circle(90), seed, 0.2)
    assert thickness_value(link) <= thickness_bruteforce(link) + 1e-9


@pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
def test_scale_equivariance(s):
    link = trefoil_symmetric(160, normalized=False)
    t = thickness_value(link)
    assert thickness_value(link.scaled(s)) == pytest.approx(s * t, rel=1e-12)
    assert ropelength(link.scaled(s)) == pytest.approx(ropelength(link), rel=1e-12)


def test_rigid_invariance():
    link = simple_chain(2, 128).link
    t = thickness_value(link)
    rng = np.random.default_rng(11)
    for _ in range(20):
        moved = link.transformed(random_rotation(rng), rng.uniform(-5, 5, 3))
        assert thickness_value(moved) == pytest.approx(t, rel=1e-9)


def test_normalize():
    link = normalize(trefoil_symmetric(128, normalized=False), 2.0)
    assert thickness_value(link) == pytest.approx(2.0, rel=1e-12)


def test_local_thickness():
    c = rolled_circle(720)
    for s in (0.0, 1.3, 4.0):
        assert local_thickness(c, ArcPosition(0, s)) == pytest.approx(1.0, abs=2e-3)
    chain = simple_chain(2).link
    # end circles of the first ring start at arclength 0
    assert local_thickness(chain, ArcPosition(0, 0.5)) == pytest.approx(1.0, rel=1e-2)
    with pytest.raises(CurveError):
        local_thickness(c, ArcPosition(1, 0.0))


def test_elbow_has_unit_thickness_at_the_arc():
    arc = [(1 - math.cos(a), math.sin(a), 0.0) for a in np.linspace(0, math.pi / 2, 60)[1:-1]]
    pts = [(0.0, -3.0, 0.0)] + [(0.0, y, 0.0) for y in np.linspace(-2.9, 0.0, 30)] + arc
    pts += [(x, 1.0, 0.0) for x in np.linspace(1.0, 4.0, 30)] + [(4.0, 1.0, 2.5), (0.0, -3.0, 2.5)]
    link = PolyLink([pts])
    s = link[0].edge_lengths()[:31 + 29].sum()
    assert local_thickness(link, ArcPosition(0, float(s))) == pytest.approx(1.0, rel=1e-2)


def test_refinement_converges():
    for make in (rolled_circle, lambda n: simple_chain(2, n).link):
        t = [thickness_value(make(n)) for n in (64, 128, 256, 512, 1024)]
        gaps = [abs(a - b) for a, b in zip(t, t[1:])]
        assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))


def test_generator_arc_chord_and_separation():
    from ropekit.generators import borromean_rings, peri_link, torus_link_2_4

    rng = np.random.default_rng(0)
    for link in (simple_chain(3, 256).link, borromean_rings(256).link,
                 torus_link_2_4(256).link, peri_link(3, 256).link, trefoil_symmetric(256)):
        tau = thickness_value(link)
        link = link.scaled(1 / tau)
        for ci, comp in enumerate(link):
            e = comp.edge_lengths().max()
            total = comp.length()
            s = rng.uniform(0, total, (2000, 2))
            p = comp.points_at(s[:, 0])
            q = comp.points_at(s[:, 1])
            chord = np.linalg.norm(p - q, axis=1)
            arc = np.abs(s[:, 0] - s[:, 1])
            arc = np.minimum(arc, total - arc)
            close = chord < 2
            assert np.all(arc[close] <= 2 * np.arcsin(chord[close] / 2) + 2 * e)
        for i in range(len(link)):
            for j in range(i + 1, len(link)):
                e = max(link[i].edge_lengths().max(), link[j].edge_lengths().max())
                assert min_distance_between(link, i, j) >= 2 - 2 * e


def test_zero_thickness_is_reported():
    spike = PolyLink([[(0, 0, 0), (2, 0, 0), (1, 0, 0), (1, 1, 0)]])
    rep = thickness(spike)
    assert rep.thickness == 0.0
    assert rep.witness_kind is WitnessKind.MIN_RAD_VERTEX


def test_resampled_polygon_equivalence_regime():
    dense = trefoil_symmetric(2048)
    tau = thickness_value(dense)
    fine = resample_count(dense, math.ceil(20 * dense.length() / tau))
    assert thickness_value(fine) == pytest.approx(thickness_bruteforce(fine), rel=1e-3)
