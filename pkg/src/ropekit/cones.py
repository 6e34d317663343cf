"""Cones over space curves: cone angle, flat and large cone points,
development into the plane and the chord-expanding unfolding."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .curve import Component, as_link
from .thickness import point_curve_distance, thickness_value

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class ConeError(ValueError):
    pass


@dataclass(frozen=True)
class ConeReport:
    apex: np.ndarray
    cone_angle: float
    apex_to_curve_distance: float
    outside_thick_tube: bool
    thickness: float = float("nan")
    evaluations: int = 0

    def as_dict(self):
        return {
            "apex": [float(x) for x in self.apex],
            "angle": self.cone_angle,
            "angle_over_pi": self.cone_angle / math.pi,
            "apex_to_curve_distance": self.apex_to_curve_distance,
            "outside_thick_tube": self.outside_thick_tube,
            "thickness": self.thickness,
        }


@dataclass(frozen=True)
class DevelopedCurve:
    """Plane polygon from developing the cone over a component.

    ``vertices`` hold one point per source vertex in order; the apex develops
    to the origin and ``apex_angle_total`` is the cone angle.
    """

    vertices: np.ndarray
    apex: np.ndarray
    apex_angle_total: float
    source: Component

    def edge_lengths(self):
        return np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)

    def points_at(self, s):
        """Plane points at source arclength ``s`` (edges map linearly)."""
        lens = self.source.edge_lengths()
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        s = np.mod(np.asarray(s, dtype=float), cum[-1])
        i = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(lens) - 1)
        f = (s - cum[i]) / lens[i]
        v = self.vertices
        return v[i] + f[:, None] * (v[(i + 1) % len(v)] - v[i])


def _component(k) -> Component:
    if isinstance(k, Component):
        return k
    link = as_link(k)
    if len(link) != 1:
        raise ConeError("expected a single component")
    return link[0]


def _apex_angles(vertices, apex):
    """Angle at the apex subtended by each edge."""
    r = vertices - apex
    rn = np.roll(r, -1, axis=0)
    cross = np.linalg.norm(np.cross(r, rn), axis=-1)
    dot = np.einsum("...k,...k->...", r, rn)
    return np.arctan2(cross, dot)


def cone_angle(k, apex) -> float:
    """Length of the radial projection of ``k`` onto the unit sphere at ``apex``."""
    k = _component(k)
    apex = np.asarray(apex, dtype=float)
    if point_curve_distance(apex, k)[0] < 1e-9:
        raise ConeError("apex lies on the curve")
    return float(_apex_angles(k.vertices, apex).sum())


def cone_angles(k, apexes) -> np.ndarray:
    """Vectorised cone angle for many apexes (no on-curve check)."""
    v = _component(k).vertices
    apexes = np.atleast_2d(np.asarray(apexes, dtype=float))
    out = np.empty(len(apexes))
    step = max(1, 400000 // len(v))
    for s in range(0, len(apexes), step):
        a = apexes[s:s + step]
        r = v[None, :, :] - a[:, None, :]
        rn = np.roll(r, -1, axis=1)
        cross = np.linalg.norm(np.cross(r, rn), axis=2)
        dot = np.einsum("pik,pik->pi", r, rn)
        out[s:s + step] = np.arctan2(cross, dot).sum(axis=1)
    return out


def longest_chord(k) -> tuple[int, int]:
    v = _component(k).vertices
    best, pair = -1.0, (0, 1)
    for i in range(len(v) - 1):
        d = np.einsum("ij,ij->i", v[i + 1:] - v[i], v[i + 1:] - v[i])
        j = int(np.argmax(d))
        if d[j] > best:
            best, pair = float(d[j]), (i, i + 1 + j)
    return pair


def fibonacci_directions(n: int) -> np.ndarray:
    """Near-uniform unit vectors on the sphere."""
    g = np.arange(n) + 0.5
    z = 1.0 - 2.0 * g / n
    phi = math.pi * (1.0 + math.sqrt(5.0)) * g
    r = np.sqrt(1.0 - z * z)
    return np.c_[r * np.cos(phi), r * np.sin(phi), z]


def _clear_directions(k, start, dirs, tau, far, tol):
    step = max(tau / 4.0, 1e-6)
    s = np.linspace(step, far, int(math.ceil(far / step)))
    pts = start[None, None, :] + s[None, :, None] * dirs[:, None, :]
    d = point_curve_distance(pts.reshape(-1, 3), k).reshape(len(dirs), -1)
    return np.all(d >= tau - tol, axis=1)


def _seeds(k, tau, tol):
    """Points on the longest chord outside the tube; the one at distance
    ``tau`` from an endpoint first, then the rest by distance to it."""
    v = k.vertices
    i, j = longest_chord(k)
    a, b = v[i], v[j]
    clen = float(np.linalg.norm(b - a))
    w0 = min(tau / clen, 0.5)
    ws = np.concatenate([[w0, 1.0 - w0], np.linspace(0.0, 1.0, 129)[1:-1]])
    pts = a + ws[:, None] * (b - a)
    d = point_curve_distance(pts, k)
    ok = d >= tau - tol
    order = np.argsort(np.abs(ws - w0), kind="stable")
    return [pts[m] for m in order if ok[m]]


def find_flat_cone_point(k, tau: float | None = None, angle_tol: float = 1e-6,
                         max_iter: int = 200, directions: int = 512, tube_tol: float = 1e-6) -> ConeReport:
    """Apex outside the thick tube with cone angle 2*pi.

    Seed on the longest chord at distance ``tau`` from one end (any chord
    point sees the curve with angle at least 2*pi), escape along a straight
    ray that stays out of the tube, and bisect on the ray for the angle 2*pi.
    """
    k = _component(k)
    if tau is None:
        tau = thickness_value(k)
    if tau <= 0:
        raise ConeError("thickness must be positive")
    v = k.vertices
    centroid = v.mean(axis=0)
    diam = float(np.linalg.norm(np.ptp(v, axis=0)))
    far_dist = 1e4 * max(diam, tau)
    dirs = fibonacci_directions(directions)
    evals = 0
    for seed in _seeds(k, tau, tube_tol):
        f_seed = cone_angle(k, seed) - TWO_PI
        evals += 1
        if abs(f_seed) <= angle_tol:
            d = float(point_curve_distance(seed, k)[0])
            return ConeReport(seed, f_seed + TWO_PI, d, d >= tau - tube_tol, tau, evals)
        if f_seed < 0:
            continue
        pref = seed - centroid
        if np.linalg.norm(pref) > 1e-12:
            ranked = dirs[np.argsort(-(dirs @ pref))]
        else:
            ranked = dirs
        clear = _clear_directions(k, seed, ranked, tau, 2.0 * diam + 2.0 * tau, tube_tol)
        if not np.any(clear):
            continue
        direction = ranked[int(np.argmax(clear))]
        apex, ang, evals = _bisect_ray(k, seed, direction, far_dist, angle_tol, max_iter, evals)
        d = float(point_curve_distance(apex, k)[0])
        return ConeReport(apex, ang, d, d >= tau - tube_tol, tau, evals)
    raise ConeError("no tube-avoiding escape ray from any chord seed")


def _bisect_ray(k, seed, direction, far_dist, angle_tol, max_iter, evals):
    lo, hi = 0.0, None
    s = 1e-7 * far_dist
    while s < far_dist:
        evals += 1
        if cone_angle(k, seed + s * direction) < TWO_PI:
            hi = s
            break
        lo = s
        s *= 2.0
    if hi is None:
        raise ConeError("cone angle never dropped below 2*pi along the escape ray")
    apex = seed + hi * direction
    ang = cone_angle(k, apex)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        p = seed + mid * direction
        a_mid = cone_angle(k, p)
        evals += 1
        if a_mid >= TWO_PI:
            lo = mid
        else:
            hi = mid
            apex, ang = p, a_mid
        if TWO_PI - ang <= angle_tol or hi - lo <= 1e-15 * max(1.0, hi):
            break
    return apex, ang, evals


def max_cone_angle_search(k, tau: float | None = None, budget: int = 4000,
                          grid: int = 32, levels: int = 3, starts: int = 12,
                          tube_tol: float = 1e-9) -> ConeReport:
    """Best-effort search for the largest cone angle outside the tube.

    Coarse grid over the (padded) bounding box, excluding points within
    ``tau`` of the curve, then coordinate descent from the best grid points
    with step halving over ``levels`` refinement levels.  The result is a lower
    bound for the true maximum.
    """
    k = _component(k)
    if tau is None:
        tau = thickness_value(k)
    v = k.vertices
    lo = v.min(axis=0) - tau
    hi = v.max(axis=0) + tau
    diag = float(np.linalg.norm(hi - lo))
    h = diag / grid
    axes = [np.arange(l, u + h / 2, h) for l, u in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    dist = point_curve_distance(pts, k)
    pts = pts[dist >= tau]
    if len(pts) == 0:
        raise ConeError("grid has no points outside the tube")
    ang = cone_angles(k, pts)
    evals = len(pts)
    order = np.argsort(-ang)[:starts]
    best_p, best_a = pts[order[0]].copy(), float(ang[order[0]])
    moves = np.vstack([np.eye(3), -np.eye(3)])
    for idx in order:
        p, a = pts[idx].copy(), float(ang[idx])
        step = h
        for _level in range(levels + 1):
            improved = True
            while improved and evals < budget * starts:
                improved = False
                cand = p + step * moves
                ok = point_curve_distance(cand, k) >= tau
                if not np.any(ok):
                    break
                ca = cone_angles(k, cand[ok])
                evals += int(ok.sum())
                m = int(np.argmax(ca))
                if ca[m] > a:
                    p, a = cand[ok][m], float(ca[m])
                    improved = True
            step /= 2.0
        if a > best_a:
            best_p, best_a = p, a
    d = float(point_curve_distance(best_p, k)[0])
    return ConeReport(best_p, best_a, d, d >= tau - tube_tol, tau, evals)


def develop(k, apex) -> DevelopedCurve:
    """Unroll the cone from ``apex`` into the plane, cutting along the ray
    through vertex 0.  Vertex ``i`` lands at polar radius ``|x_i - apex|`` and
    angle equal to the accumulated apex angles of edges ``0..i-1``."""
    k = _component(k)
    apex = np.asarray(apex, dtype=float)
    v = k.vertices
    if point_curve_distance(apex, k)[0] < 1e-9:
        raise ConeError("apex lies on the curve")
    inc = _apex_angles(v, apex)
    phi = np.concatenate([[0.0], np.cumsum(inc)[:-1]])
    rad = np.linalg.norm(v - apex, axis=1)
    plane = np.c_[rad * np.cos(phi), rad * np.sin(phi)]
    return DevelopedCurve(plane, apex, float(inc.sum()), k)


def unfold(k, tau: float | None = None, angle_tol: float = 1e-13) -> DevelopedCurve:
    """Plane curve of the same arclength whose chords are all at least as long:
    develop the cone from a flat cone point."""
    k = _component(k)
    report = find_flat_cone_point(k, tau, angle_tol=angle_tol)
    return develop(k, report.apex)


def geodesic_turning(k, apex) -> np.ndarray:
    """Turning angle of ``k`` at each vertex measured inside the cone."""
    k = _component(k)
    v = k.vertices
    p = np.asarray(apex, dtype=float)

    def angle_at(x, y, z):
        a, b = y - x, z - x
        return np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.einsum("...k,...k->...", a, b))

    prev = np.roll(v, 1, axis=0)
    nxt = np.roll(v, -1, axis=0)
    beta = angle_at(v, prev, p) + angle_at(v, p, nxt)
    return math.pi - beta


def parallel_pushoff_length_check(k, apex, t: float, rtol: float = 1e-3) -> float:
    """Length of the parallel curve at distance ``t`` inside the cone.

    Within the flat cone each edge moves inward by ``t`` and shortens by
    ``t * (tan(g_i/2) + tan(g_{i+1}/2))`` where ``g`` is the geodesic turning
    at its ends.  Checks that the deficit equals ``t`` times the cone angle.
    """
    k = _component(k)
    if not 0 < t < 1:
        raise ConeError("pushoff distance must lie in (0, 1)")
    g = geodesic_turning(k, apex)
    lens = k.edge_lengths()
    tg = np.tan(g / 2.0)
    new = lens - t * (tg + np.roll(tg, -1))
    if np.any(new <= 0):
        raise ConeError("parallel curve self-intersects at this distance")
    other = float(new.sum())
    theta = cone_angle(k, apex)
    deficit = k.length() - other
    if abs(deficit - t * theta) > rtol * max(t * theta, 1e-300):
        raise ConeError(f"length deficit {deficit} differs from t * cone angle {t * theta}")
    return other


def closing_point(dev: DevelopedCurve) -> np.ndarray:
    """Where the edge leaving the last vertex ends after development; equals
    vertex 0 exactly when the cone angle is 2*pi."""
    v = dev.source.vertices
    r0 = float(np.linalg.norm(v[0] - dev.apex))
    return r0 * np.array([math.cos(dev.apex_angle_total), math.sin(dev.apex_angle_total)])


def chord_expansion_defect(k, dev: DevelopedCurve, samples: int = 10_000, seed: int = 0) -> float:
    """Largest contraction ``|K(s)-K(t)| - |K'(s)-K'(t)|`` over random
    arclength pairs (nonpositive when the development expands chords)."""
    k = _component(k)
    rng = np.random.default_rng(seed)
    L = k.length()
    s = rng.uniform(0.0, L, samples)
    t = rng.uniform(0.0, L, samples)
    d3 = np.linalg.norm(k.points_at(s) - k.points_at(t), axis=1)
    d2 = np.linalg.norm(dev.points_at(s) - dev.points_at(t), axis=1)
    return float(np.max(d3 - d2))
