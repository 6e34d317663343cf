"""Closed polygonal space curves and the circle primitives used for thickness.

A :class:`Component` is an ``(n, 3)`` float array of vertices of a closed
polygon; the closing edge from the last vertex back to the first is implicit
and the first vertex is never repeated.  A :class:`PolyLink` is a tuple of
components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

COLLINEAR_EPS = 1e-14


class CurveError(ValueError):
    """Raised for invalid curve data (too few vertices, zero edges, NaN...)."""


class Component:
    """One closed polygon.  Vertices are stored read-only."""

    __slots__ = ("_v",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise CurveError(f"expected (n, 3) vertex array, got shape {v.shape}")
        if len(v) < 3:
            raise CurveError("a closed component needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise CurveError("vertex coordinates must be finite")
        edges = np.roll(v, -1, axis=0) - v
        if np.any(np.einsum("ij,ij->i", edges, edges) == 0.0):
            raise CurveError("consecutive vertices must be distinct")
        v.setflags(write=False)
        self._v = v

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    def __len__(self):
        return len(self._v)

    def __repr__(self):
        return f"Component(n={len(self._v)}, length={self.length():.6g})"

    def edges(self) -> np.ndarray:
        """Edge vectors; edge ``i`` runs from vertex ``i`` to ``i + 1``."""
        return np.roll(self._v, -1, axis=0) - self._v

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges(), axis=1)

    def length(self) -> float:
        return float(self.edge_lengths().sum())

    def reversed(self) -> "Component":
        return Component(self._v[::-1])

    def transformed(self, rotation=None, translation=None, scale=1.0) -> "Component":
        v = self._v * scale
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=float).T
        if translation is not None:
            v = v + np.asarray(translation, dtype=float)
        return Component(v)

    def point_at(self, s: float) -> np.ndarray:
        """Point at arclength ``s`` (taken modulo the length) from vertex 0."""
        lengths = self.edge_lengths()
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        s = s % cum[-1]
        i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(lengths) - 1)
        f = (s - cum[i]) / lengths[i]
        return self._v[i] + f * (self._v[(i + 1) % len(self._v)] - self._v[i])

    def points_at(self, s) -> np.ndarray:
        """Vectorised :meth:`point_at`."""
        lengths = self.edge_lengths()
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        s = np.mod(np.asarray(s, dtype=float), cum[-1])
        i = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(lengths) - 1)
        f = (s - cum[i]) / lengths[i]
        nxt = self._v[(i + 1) % len(self._v)]
        return self._v[i] + f[:, None] * (nxt - self._v[i])


@dataclass(frozen=True)
class ArcPosition:
    component: int
    s: float


class PolyLink:
    """A link: one or more closed polygonal components."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable):
        comps = tuple(c if isinstance(c, Component) else Component(c) for c in components)
        if not comps:
            raise CurveError("a link needs at least one component")
        self.components = comps

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i) -> Component:
        return self.components[i]

    def __repr__(self):
        sizes = ",".join(str(len(c)) for c in self.components)
        return f"PolyLink(components={len(self.components)}, vertices=[{sizes}])"

    @property
    def num_vertices(self) -> int:
        return sum(len(c) for c in self.components)

    def all_vertices(self) -> np.ndarray:
        return np.concatenate([c.vertices for c in self.components])

    def length(self) -> float:
        return sum(c.length() for c in self.components)

    def component_length(self, i: int) -> float:
        return self.components[i].length()

    def transformed(self, rotation=None, translation=None, scale=1.0) -> "PolyLink":
        return PolyLink(c.transformed(rotation, translation, scale) for c in self.components)

    def scaled(self, s: float) -> "PolyLink":
        return self.transformed(scale=s)

    def reversed_component(self, i: int) -> "PolyLink":
        comps = list(self.components)
        comps[i] = comps[i].reversed()
        return PolyLink(comps)

    def validate_position(self, at: ArcPosition) -> None:
        if not 0 <= at.component < len(self.components):
            raise CurveError(f"component index {at.component} out of range")
        if not 0.0 <= at.s < self.components[at.component].length():
            raise CurveError(f"arclength {at.s} outside [0, length)")


def as_link(obj) -> PolyLink:
    """Coerce a Component, array or PolyLink into a PolyLink."""
    if isinstance(obj, PolyLink):
        return obj
    if isinstance(obj, Component):
        return PolyLink([obj])
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 2:
        return PolyLink([arr])
    return PolyLink(list(obj))


def length(link) -> float:
    return as_link(link).length()


def component_length(link, i: int) -> float:
    return as_link(link).component_length(i)


def circumradius(x, y, z) -> float:
    """Radius of the circle through three points; ``inf`` if collinear."""
    x, y, z = (np.asarray(p, dtype=float) for p in (x, y, z))
    a = np.linalg.norm(y - z)
    b = np.linalg.norm(x - z)
    c = np.linalg.norm(x - y)
    if a == 0.0 or b == 0.0 or c == 0.0:
        raise CurveError("circumradius needs three distinct points")
    twice_area = np.linalg.norm(np.cross(y - x, z - x))
    if twice_area / 2.0 < COLLINEAR_EPS * max(a, b, c) ** 2:
        return math.inf
    return float(a * b * c / (2.0 * twice_area))


def circumradii(x, y, z) -> np.ndarray:
    """Vectorised circumradius over broadcast arrays of points (no checks)."""
    a = np.linalg.norm(y - z, axis=-1)
    b = np.linalg.norm(x - z, axis=-1)
    c = np.linalg.norm(x - y, axis=-1)
    twice_area = np.linalg.norm(np.cross(y - x, z - x), axis=-1)
    m = np.maximum(np.maximum(a, b), c)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = a * b * c / (2.0 * twice_area)
    return np.where(twice_area / 2.0 < COLLINEAR_EPS * m * m, np.inf, r)


def tangent_circle_radius(base, direction, y) -> float:
    """Radius of the circle tangent to the line ``base + t*direction`` at
    ``base`` and passing through ``y``; ``inf`` when ``y`` is on that line."""
    base = np.asarray(base, dtype=float)
    d = np.asarray(direction, dtype=float)
    dy = np.asarray(y, dtype=float) - base
    dist2 = float(dy @ dy)
    if dist2 == 0.0:
        raise CurveError("tangent_circle_radius needs y distinct from base")
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise CurveError("direction must be a unit vector")
    perp = np.linalg.norm(dy - (dy @ d) * d)
    if perp <= COLLINEAR_EPS * math.sqrt(dist2):
        return math.inf
    return dist2 / (2.0 * perp)


def vertex_tangents(comp: Component) -> np.ndarray:
    """Unit tangent at each vertex: normalised sum of the adjacent unit edges."""
    e = comp.edges()
    u = e / np.linalg.norm(e, axis=1)[:, None]
    t = u + np.roll(u, 1, axis=0)
    n = np.linalg.norm(t, axis=1)
    # reversal vertices have no tangent; fall back to the outgoing edge
    bad = n < 1e-12
    t[bad] = u[bad]
    n[bad] = 1.0
    return t / n[:, None]


def turning_angles(comp: Component) -> np.ndarray:
    """Exterior turning angle at each vertex, in [0, pi]."""
    e = comp.edges()
    u = e / np.linalg.norm(e, axis=1)[:, None]
    prev = np.roll(u, 1, axis=0)
    cross = np.linalg.norm(np.cross(prev, u), axis=1)
    dot = np.einsum("ij,ij->i", prev, u)
    return np.arctan2(cross, dot)


def resample(link, target_edge_length: float) -> PolyLink:
    """Replace every component by a polygon with vertices spaced evenly in
    arclength along the original, edge length close to ``target_edge_length``.

    The first vertex of each component is kept, so orientation and phase are
    preserved.
    """
    if target_edge_length <= 0:
        raise CurveError("target edge length must be positive")
    link = as_link(link)
    out = []
    for comp in link:
        total = comp.length()
        if target_edge_length > total:
            raise CurveError("target edge length exceeds component length")
        m = max(3, int(round(total / target_edge_length)))
        out.append(Component(comp.points_at(np.arange(m) * (total / m))))
    return PolyLink(out)


def resample_count(link, counts: int | Sequence[int]) -> PolyLink:
    """Resample each component to a fixed number of arclength-equispaced vertices."""
    link = as_link(link)
    if isinstance(counts, (int, np.integer)):
        counts = [int(counts)] * len(link)
    out = []
    for comp, m in zip(link, counts):
        total = comp.length()
        out.append(Component(comp.points_at(np.arange(m) * (total / m))))
    return PolyLink(out)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly random rotation matrix (QR of a Gaussian matrix)."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
