"""Reference configurations with known (or reference) ropelength.

Plane pieces are described as closed sequences of straight segments and
circular arcs in a 2-d frame, then sampled uniformly in arclength and placed
in space.  Tight shapes are built at unit thickness: tube radius 1, so arcs of
radius 2 around puncture points that are 2 apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import Component, PolyLink, as_link


@dataclass
class GeneratedConfig:
    link: PolyLink
    claimed_ropelength: float
    claimed_thickness: float
    provenance: str
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# plane paths


@dataclass(frozen=True)
class _Line:
    start: tuple
    end: tuple

    @property
    def length(self):
        return math.dist(self.start, self.end)

    def at(self, u):
        a, b = np.asarray(self.start), np.asarray(self.end)
        return a + np.outer(u / self.length, b - a)


@dataclass(frozen=True)
class _Arc:
    center: tuple
    radius: float
    start_angle: float
    sweep: float  # signed

    @property
    def length(self):
        return abs(self.sweep) * self.radius

    def at(self, u):
        ang = self.start_angle + np.sign(self.sweep) * u / self.radius
        c = np.asarray(self.center)
        return c + self.radius * np.c_[np.cos(ang), np.sin(ang)]


def _sample_path(pieces, n: int, phase: float = 0.0) -> np.ndarray:
    """``n`` points spaced evenly in arclength along a closed piecewise path,
    starting at arclength ``phase``."""
    lens = np.array([p.length for p in pieces])
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    total = cum[-1]
    s = (phase + np.arange(n) * total / n) % total
    out = np.empty((n, 2))
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(pieces) - 1)
    for k, piece in enumerate(pieces):
        sel = idx == k
        if np.any(sel):
            out[sel] = piece.at(s[sel] - cum[k])
    return out


def _path_length(pieces) -> float:
    return float(sum(p.length for p in pieces))


def _embed(points2d, origin, e1, e2) -> np.ndarray:
    o = np.asarray(origin, dtype=float)
    return o + np.outer(points2d[:, 0], e1) + np.outer(points2d[:, 1], e2)


def hull_of_disks(centers, radius: float):
    """Closed path bounding the convex hull of equal disks around convex-position
    centers given counterclockwise.  One center gives a circle."""
    c = [np.asarray(p, dtype=float) for p in centers]
    if len(c) == 1:
        return [_Arc(tuple(c[0]), radius, 0.0, 2 * math.pi)]
    pieces = []
    m = len(c)
    for k in range(m):
        a, b = c[k], c[(k + 1) % m]
        d = (b - a) / np.linalg.norm(b - a)
        out = np.array([d[1], -d[0]])  # outward normal for ccw order
        pieces.append(_Line(tuple(a + radius * out), tuple(b + radius * out)))
        # arc around b from this edge's normal to the next edge's normal
        nxt = c[(k + 2) % m]
        d2 = (nxt - b) / np.linalg.norm(nxt - b)
        out2 = np.array([d2[1], -d2[0]])
        a0 = math.atan2(out[1], out[0])
        a1 = math.atan2(out2[1], out2[0])
        sweep = (a1 - a0) % (2 * math.pi)
        pieces.append(_Arc(tuple(b), radius, a0, sweep))
    return pieces


# ---------------------------------------------------------------------------
# chains and perimeter-minimising components


def stadium_pieces(straight: float, radius: float = 2.0):
    """Stadium with cap centres at (0, 0) and (straight, 0); ``straight == 0``
    gives a circle.  Starts at the right cap's extreme point."""
    if straight == 0:
        return [_Arc((0.0, 0.0), radius, 0.0, 2 * math.pi)]
    return [
        _Arc((straight, 0.0), radius, 0.0, math.pi / 2),
        _Line((straight, radius), (0.0, radius)),
        _Arc((0.0, 0.0), radius, math.pi / 2, math.pi),
        _Line((0.0, -radius), (straight, -radius)),
        _Arc((straight, 0.0), radius, -math.pi / 2, math.pi / 2),
    ]


def chain_ropelength(k: int) -> float:
    return (4 * math.pi + 4) * k - 8


def simple_chain(k: int, vertices_per_component: int = 512) -> GeneratedConfig:
    """Tight chain of ``k`` rings: radius-2 circles at the ends, stadiums of
    straightaway 2 in between, alternating between the xy and xz planes.

    Each ring's left cap centre sits on the previous ring's rightmost point, so
    neighbouring rings touch at tube distance 2.
    """
    if k < 2:
        raise ValueError("a chain needs at least two components")
    n = int(vertices_per_component)
    if n < 8 or n % 2:
        raise ValueError("vertices_per_component must be an even number >= 8")
    comps = []
    left = 0.0
    ex = np.array([1.0, 0.0, 0.0])
    for i in range(k):
        straight = 0.0 if i in (0, k - 1) else 2.0
        e2 = np.array([0.0, 1.0, 0.0]) if i % 2 == 0 else np.array([0.0, 0.0, 1.0])
        pts = _sample_path(stadium_pieces(straight), n)
        comps.append(Component(_embed(pts, (left, 0.0, 0.0), ex, e2)))
        left += straight + 2.0
    return GeneratedConfig(
        PolyLink(comps),
        claimed_ropelength=chain_ropelength(k),
        claimed_thickness=1.0,
        provenance="chain:(4pi+4)k-8",
        params={"k": k, "vertices_per_component": n},
    )


def peri_centers(n: int) -> list:
    """Puncture centres for the perimeter minimisers, at mutual distance 2."""
    if n == 1:
        return [(0.0, 0.0)]
    if n == 2:
        return [(0.0, 0.0), (2.0, 0.0)]
    if n == 3:
        return [(0.0, 0.0), (2.0, 0.0), (1.0, math.sqrt(3.0))]
    if n == 4:
        return [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]
    raise ValueError(
        "peri components are built for n <= 4 only; n = 5 has a two-parameter "
        "family of minimisers and n >= 6 is not constructed"
    )


def peri_length(n: int) -> float:
    """Length 2*pi + Peri(n) of the tight component surrounding ``n`` punctures."""
    from .bounds import peri

    return 2 * math.pi + peri(n)


def peri_component(n: int, vertices: int = 512) -> Component:
    """Plane curve at distance 2 around ``n`` puncture points (xy plane)."""
    pieces = hull_of_disks(peri_centers(n), 2.0)
    pts = _sample_path(pieces, vertices)
    return Component(_embed(pts, (0, 0, 0), (1, 0, 0), (0, 1, 0)))


def peri_link(n: int, vertices_per_component: int = 512) -> GeneratedConfig:
    """The peri component plus one radius-2 ring through each puncture point.

    Each ring lies in the vertical plane through its puncture point along the
    outward direction from the centroid, centred on the peri component.
    """
    centers = [np.array(c) for c in peri_centers(n)]
    main = peri_component(n, vertices_per_component)
    comps = [main]
    centroid = np.mean(centers, axis=0)
    for c in centers:
        out = c - centroid
        if np.linalg.norm(out) < 1e-12:
            out = np.array([1.0, 0.0])
        out = out / np.linalg.norm(out)
        ring_center = np.r_[c + 2.0 * out, 0.0]
        pts = _sample_path([_Arc((0.0, 0.0), 2.0, math.pi, 2 * math.pi)], vertices_per_component)
        comps.append(Component(_embed(pts, ring_center, np.r_[out, 0.0], (0, 0, 1))))
    claimed = peri_length(n) + 4 * math.pi * n
    return GeneratedConfig(
        PolyLink(comps), claimed, 1.0, f"peri:n={n}", {"n": n}
    )


# ---------------------------------------------------------------------------
# Borromean rings


def borromean_diagonals() -> tuple[float, float]:
    """Rhombus of side 4 whose long diagonal exceeds the short one by 4."""
    q = 2.0 * math.sqrt(7.0) - 2.0
    return q, q + 4.0


def borromean_pieces():
    """One component in its own plane: convex radius-2 arcs around the ends of
    the short diagonal (on the v axis), concave arcs around the ends of the
    long diagonal (on the u axis), switching at the rhombus side midpoints."""
    q, p = borromean_diagonals()
    a, b = p / 2.0, q / 2.0
    beta = math.atan2(b, a)
    return [
        _Arc((0.0, b), 2.0, -beta, math.pi + 2 * beta),           # around B, over the top
        _Arc((-a, 0.0), 2.0, beta, -2 * beta),                    # inside C
        _Arc((0.0, -b), 2.0, math.pi - beta, math.pi + 2 * beta),  # around D, under the bottom
        _Arc((a, 0.0), 2.0, math.pi + beta, -2 * beta),           # inside A
    ]


def borromean_rings(vertices_per_component: int = 512) -> GeneratedConfig:
    pieces = borromean_pieces()
    pts = _sample_path(pieces, vertices_per_component)
    axes = np.eye(3)
    comps = []
    for k in range(3):
        # component k: long diagonal along axis k, short diagonal along axis k+1
        comps.append(Component(_embed(pts, (0, 0, 0), axes[k], axes[(k + 1) % 3])))
    per = _path_length(pieces)
    return GeneratedConfig(
        PolyLink(comps),
        claimed_ropelength=3 * per,
        claimed_thickness=1.0,
        provenance="borromean:about 58.05",
        params={"vertices_per_component": vertices_per_component, "component_length": per},
    )


# ---------------------------------------------------------------------------
# reference curves for the test corpus

TORUS24_MAJOR = 2.2
TORUS24_MINOR = 0.85


def torus_component(p: int, q: int, phase: float, n: int, major: float, minor: float) -> np.ndarray:
    t = 2 * math.pi * np.arange(n) / n
    ang = q * t + phase
    rho = major + minor * np.cos(ang)
    # height sign chosen so that two such curves link positively
    return np.c_[rho * np.cos(p * t), rho * np.sin(p * t), -minor * np.sin(ang)]


def torus_link_2_4(vertices_per_component: int = 512, major: float = TORUS24_MAJOR,
                   minor: float = TORUS24_MINOR) -> GeneratedConfig:
    """(2,4)-torus link: two (1,2) curves on a round torus, normalised to unit
    thickness.  The claimed value is the published reference for an optimised
    shape, not this one."""
    from .thickness import normalize

    comps = [
        torus_component(1, 2, phase, vertices_per_component, major, minor)
        for phase in (0.0, math.pi)
    ]
    link = normalize(PolyLink(comps))
    return GeneratedConfig(link, 41.2, 1.0, "torus24:reference 41.2",
                           {"major": major, "minor": minor})


def rolled_circle(n: int = 512, radius: float = 1.0) -> PolyLink:
    """Regular ``n``-gon inscribed in a circle of the given radius (xy plane)."""
    t = 2 * math.pi * np.arange(n) / n
    return PolyLink([np.c_[radius * np.cos(t), radius * np.sin(t), np.zeros(n)]])


def ellipse(n: int = 512, a: float = 2.0, b: float = 1.0) -> PolyLink:
    t = 2 * math.pi * np.arange(n) / n
    return PolyLink([np.c_[a * np.cos(t), b * np.sin(t), np.zeros(n)]])


def trefoil_symmetric(n: int = 256, normalized: bool = True) -> PolyLink:
    """Three-fold symmetric trefoil ``((2 + cos 3t) cos 2t, (2 + cos 3t) sin 2t, sin 3t)``,
    optionally rescaled to unit thickness."""
    t = 2 * math.pi * np.arange(n) / n
    rho = 2.0 + np.cos(3 * t)
    link = PolyLink([np.c_[rho * np.cos(2 * t), rho * np.sin(2 * t), np.sin(3 * t)]])
    if normalized:
        from .thickness import normalize

        link = normalize(link)
    return link


def perturbed(link, seed: int, amplitude: float, modes: int = 3) -> PolyLink:
    """Add a smooth random low-frequency displacement to every component.

    Displacement of vertex ``i`` of an ``n``-gon is a random trigonometric
    polynomial in ``2*pi*i/n`` of degree ``modes`` with unit-scale coefficients,
    times ``amplitude``.  ``amplitude == 0`` returns the input unchanged.
    """
    link = as_link(link)
    if amplitude == 0:
        return link
    rng = np.random.default_rng(seed)
    out = []
    for c in link:
        n = len(c)
        t = 2 * math.pi * np.arange(n) / n
        disp = np.zeros((n, 3))
        for k in range(1, modes + 1):
            a = rng.standard_normal(3)
            b = rng.standard_normal(3)
            disp += (np.outer(np.cos(k * t), a) + np.outer(np.sin(k * t), b)) / k
        out.append(Component(c.vertices + amplitude * disp / math.sqrt(2 * modes)))
    return PolyLink(out)
