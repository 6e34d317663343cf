import math

import numpy as np
import pytest

from ropekit import generators as G
from ropekit.bounds import bound_linking
from ropekit.invariants import compute_invariants, total_curvature
from ropekit.thickness import thickness


@pytest.mark.parametrize("k", [2, 3, 5])
def test_chain_ropelength(k):
    cfg = G.simple_chain(k)
    assert cfg.claimed_ropelength == pytest.approx((4 * math.pi + 4) * k - 8)
    rep = thickness(cfg.link)
    assert rep.thickness == pytest.approx(1.0, rel=5e-3)
    assert rep.ropelength == pytest.approx(cfg.claimed_ropelength, rel=5e-3)


def test_chain_examples():
    assert G.chain_ropelength(2) == pytest.approx(8 * math.pi)
    assert G.chain_ropelength(3) == pytest.approx(41.699, abs=1e-3)
    assert G.chain_ropelength(5) == pytest.approx(20 * math.pi + 12)
    with pytest.raises(ValueError):
        G.simple_chain(1)


def test_chain_shapes_and_linking():
    k = 4
    link = G.simple_chain(k, 256).link
    lengths = [c.length() for c in link]
    assert lengths[0] == pytest.approx(4 * math.pi, rel=1e-3)
    assert lengths[-1] == pytest.approx(4 * math.pi, rel=1e-3)
    for m in lengths[1:-1]:
        assert m == pytest.approx(4 * math.pi + 4, rel=1e-3)
    lk = np.abs(compute_invariants(link, with_writhe=False).pairwise_linking)
    for i in range(k):
        for j in range(k):
            assert lk[i, j] == (1 if abs(i - j) == 1 else 0)


@pytest.mark.parametrize("n, expect", [(1, 4 * math.pi), (2, 4 * math.pi + 4), (3, 4 * math.pi + 6), (4, 4 * math.pi + 8)])
def test_peri_component_length(n, expect):
    assert G.peri_component(n).length() == pytest.approx(expect, rel=2e-3)
    assert G.peri_length(n) == pytest.approx(expect)


def test_peri_refuses_five():
    with pytest.raises(ValueError):
        G.peri_component(5)


def test_peri_link_is_tight():
    cfg = G.peri_link(3, 256)
    rep = thickness(cfg.link)
    assert rep.thickness == pytest.approx(1.0, rel=5e-3)
    assert rep.ropelength == pytest.approx(cfg.claimed_ropelength, rel=5e-3)


def test_borromean():
    q, p = G.borromean_diagonals()
    assert q == pytest.approx(3.2915, abs=1e-4)
    assert p == pytest.approx(7.2915, abs=1e-4)
    assert q * q + p * p == pytest.approx(64.0, abs=1e-12)
    cfg = G.borromean_rings()
    rep = thickness(cfg.link)
    assert rep.ropelength == pytest.approx(58.05, abs=0.5)
    lk = compute_invariants(cfg.link, with_writhe=False).pairwise_linking
    assert np.all(lk == 0)
    normals = [np.linalg.svd(c.vertices - c.vertices.mean(0))[2][-1] for c in cfg.link]
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(normals[i] @ normals[j]) < 1e-9
    lens = [c.length() for c in cfg.link]
    assert max(lens) - min(lens) < 1e-9


def test_torus_link():
    cfg = G.torus_link_2_4()
    rep = thickness(cfg.link)
    assert rep.thickness == pytest.approx(1.0, abs=1e-9)
    lower = 2 * bound_linking(2)
    assert lower <= rep.ropelength <= 45.0
    assert compute_invariants(cfg.link, with_writhe=False).pairwise_linking[0, 1] == 2


def test_small_generators():
    t = thickness(G.rolled_circle(4096))
    assert t.thickness == pytest.approx(1.0, abs=1e-6)
    assert total_curvature(G.trefoil_symmetric(256)[0]) >= 4 * math.pi
    base = G.trefoil_symmetric(64)
    assert np.array_equal(G.perturbed(base, 5, 0.0)[0].vertices, base[0].vertices)


def test_deterministic():
    a = G.perturbed(G.rolled_circle(50), 9, 0.2)
    b = G.perturbed(G.rolled_circle(50), 9, 0.2)
    assert np.array_equal(a[0].vertices, b[0].vertices)
    c = G.simple_chain(3, 64).link
    d = G.simple_chain(3, 64).link
    assert all(np.array_equal(x.vertices, y.vertices) for x, y in zip(c, d))
