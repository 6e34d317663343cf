"""Thickness and ropelength of polygonal links.

The fast path splits thickness into the infimal radius of curvature (minRad,
evaluated per vertex) and half the shortest doubly critical chord (dcsd,
found among closest-point pairs of non-adjacent segments).  A brute-force
three-point circumradius scan over vertex triples is kept as an independent
oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .curve import (
    COLLINEAR_EPS,
    ArcPosition,
    PolyLink,
    as_link,
    circumradii,
    tangent_circle_radius,
    turning_angles,
    vertex_tangents,
)

BRUTE_FORCE_SEGMENTS = 64


class WitnessKind(str, Enum):
    MIN_RAD_VERTEX = "MinRadVertex"
    DOUBLY_CRITICAL_CHORD = "DoublyCriticalChord"


@dataclass(frozen=True)
class ThicknessReport:
    thickness: float
    ropelength: float
    length: float
    witness_kind: WitnessKind
    witness: tuple
    minrad_value: float
    dcsd_value: float

    def as_dict(self) -> dict:
        if self.witness_kind is WitnessKind.MIN_RAD_VERTEX:
            w = {"component": self.witness[0], "vertex": self.witness[1]}
        else:
            a, b = self.witness
            w = {
                "a": {"component": a.component, "s": a.s},
                "b": {"component": b.component, "s": b.s},
            }
        return {
            "length": self.length,
            "thickness": self.thickness,
            "ropelength": self.ropelength,
            "minrad": self.minrad_value,
            "dcsd": self.dcsd_value,
            "witness_kind": self.witness_kind.value,
            "witness": w,
        }


# ---------------------------------------------------------------------------
# segment bookkeeping


class _Segments:
    """Flat arrays describing every edge of a link."""

    def __init__(self, link: PolyLink):
        p0, p1, comp, local, prev_dir, next_dir, start_s = [], [], [], [], [], [], []
        offsets = [0]
        for ci, c in enumerate(link):
            v = c.vertices
            e = c.edges()
            lens = np.linalg.norm(e, axis=1)
            u = e / lens[:, None]
            p0.append(v)
            p1.append(np.roll(v, -1, axis=0))
            comp.append(np.full(len(v), ci))
            local.append(np.arange(len(v)))
            # unit direction of the edge before vertex i (start of segment i)
            prev_dir.append(np.roll(u, 1, axis=0))
            # unit direction of the edge after vertex i+1 (end of segment i)
            next_dir.append(np.roll(u, -1, axis=0))
            start_s.append(np.concatenate([[0.0], np.cumsum(lens)[:-1]]))
            offsets.append(offsets[-1] + len(v))
        self.p0 = np.concatenate(p0)
        self.p1 = np.concatenate(p1)
        self.d = self.p1 - self.p0
        self.len = np.linalg.norm(self.d, axis=1)
        self.u = self.d / self.len[:, None]
        self.comp = np.concatenate(comp)
        self.local = np.concatenate(local)
        self.prev_dir = np.concatenate(prev_dir)
        self.next_dir = np.concatenate(next_dir)
        self.start_s = np.concatenate(start_s)
        self.sizes = np.array([len(c) for c in link])
        self.offsets = np.array(offsets)
        self.n = len(self.p0)

    def adjacent(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """True for identical segments or segments sharing a vertex."""
        same = self.comp[i] == self.comp[j]
        n = self.sizes[self.comp[i]]
        diff = np.abs(self.local[i] - self.local[j])
        return same & ((diff <= 1) | (diff == n - 1))


def segment_closest_points(p0, d0, q0, d1):
    """Closest points between batches of segments ``p0 + s*d0`` and
    ``q0 + t*d1`` with ``s, t`` in [0, 1].  Returns ``(s, t, dist)``."""
    r = p0 - q0
    a = np.einsum("ij,ij->i", d0, d0)
    e = np.einsum("ij,ij->i", d1, d1)
    f = np.einsum("ij,ij->i", d1, r)
    c = np.einsum("ij,ij->i", d0, r)
    b = np.einsum("ij,ij->i", d0, d1)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-14 * a * e, (b * f - c * e) / denom, 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = (b * s + f) / e
    low = t < 0.0
    high = t > 1.0
    t = np.clip(t, 0.0, 1.0)
    s = np.where(low, np.clip(-c / a, 0.0, 1.0), s)
    s = np.where(high, np.clip((b - c) / a, 0.0, 1.0), s)
    x = p0 + s[:, None] * d0
    y = q0 + t[:, None] * d1
    return s, t, np.linalg.norm(x - y, axis=1)


def _candidate_pairs(seg: _Segments, radius: float, chunk: int = 1 << 18):
    """Yield index pairs ``i < j`` of segments whose distance may be <= radius,
    in batches of roughly ``chunk`` pairs.

    Uniform hash grid on segment midpoints; exact in the sense that every pair
    at distance <= radius is produced.
    """
    mid = 0.5 * (seg.p0 + seg.p1)
    half = 0.5 * seg.len.max()
    cell = radius + 2.0 * half
    keys = None
    if np.isfinite(cell) and cell > 0 and seg.n > BRUTE_FORCE_SEGMENTS:
        keys = np.floor((mid - mid.min(axis=0)) / cell).astype(np.int64)
        span = keys.max(axis=0) + 3
        if np.prod(span.astype(float)) < 8:
            keys = None
    if keys is None:
        iu, ju = np.triu_indices(seg.n, k=1)
        for k in range(0, len(iu), chunk):
            yield iu[k:k + chunk], ju[k:k + chunk]
        return
    flat = (keys[:, 0] * span[1] + keys[:, 1]) * span[2] + keys[:, 2]
    order = np.argsort(flat, kind="stable")
    uniq, starts, counts = np.unique(flat[order], return_index=True, return_counts=True)
    lookup = dict(zip(uniq.tolist(), zip(starts.tolist(), counts.tolist())))
    offsets = [
        (dx * span[1] + dy) * span[2] + dz
        for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)
    ]
    ii, jj, size = [], [], 0
    for key, (st, cnt) in lookup.items():
        here = order[st:st + cnt]
        near = [lookup.get(key + off) for off in offsets]
        there = np.concatenate([order[o[0]:o[0] + o[1]] for o in near if o is not None])
        block = max(1, chunk // len(there))
        for h0 in range(0, len(here), block):
            h = here[h0:h0 + block]
            a = np.repeat(h, len(there))
            b = np.tile(there, len(h))
            keep = a < b
            ii.append(a[keep])
            jj.append(b[keep])
            size += len(ii[-1])
            if size >= chunk:
                yield np.concatenate(ii), np.concatenate(jj)
                ii, jj, size = [], [], 0
    if ii:
        yield np.concatenate(ii), np.concatenate(jj)


# ---------------------------------------------------------------------------
# the two terms of the decomposition


def min_rad(link) -> tuple[float, tuple[int, int]]:
    """Polygonal infimal radius of curvature and the vertex attaining it.

    Each vertex contributes ``min(e_prev, e_next) / (2 tan(theta/2))`` where
    ``theta`` is its turning angle.
    """
    link = as_link(link)
    best, where = math.inf, (0, 0)
    for ci, c in enumerate(link):
        theta = turning_angles(c)
        lens = c.edge_lengths()
        emin = np.minimum(lens, np.roll(lens, 1))
        with np.errstate(divide="ignore"):
            r = np.where(theta > 0.0, emin / (2.0 * np.tan(theta / 2.0)), np.inf)
        r = np.where(theta >= math.pi - 1e-12, 0.0, r)
        k = int(np.argmin(r))
        if r[k] < best:
            best, where = float(r[k]), (ci, k)
    return best, where


def _endpoint_critical(u, w_in, w_out):
    """Chord direction ``u`` (pointing away from a polygon vertex) is critical
    at that vertex when the derivative of distance changes sign across it."""
    return np.einsum("ij,ij->i", u, w_in) * np.einsum("ij,ij->i", u, w_out) <= 1e-15


def _chord_is_critical(seg: _Segments, i, j, s, t, dist, window):
    """Perpendicularity test for closest-point chords of segment pairs."""
    x = seg.p0[i] + s[:, None] * seg.d[i]
    y = seg.p0[j] + t[:, None] * seg.d[j]
    with np.errstate(invalid="ignore", divide="ignore"):
        u = (y - x) / dist[:, None]
    ok = dist > 0.0

    def end_ok(idx, param, direction, sin_window):
        interior = (param > 0.0) & (param < 1.0)
        at_start = param <= 0.0
        # at a vertex use the edge on either side of it
        w_in = np.where(at_start[:, None], seg.prev_dir[idx], seg.u[idx])
        w_out = np.where(at_start[:, None], seg.u[idx], seg.next_dir[idx])
        exact = _endpoint_critical(direction, w_in, w_out)
        tangent = w_in + w_out
        tn = np.linalg.norm(tangent, axis=1)
        # tangent uncertainty at a vertex never exceeds its turning angle
        turn_sin = np.linalg.norm(np.cross(w_in, w_out), axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = np.abs(np.einsum("ij,ij->i", direction, tangent)) / tn
        near = cosang <= np.minimum(sin_window, turn_sin)
        return interior | exact | near

    sin_w = np.minimum(1.0, window)
    ok &= end_ok(i, s, u, sin_w)
    ok &= end_ok(j, t, -u, sin_w)
    return ok


def doubly_critical_self_distance(link, scope: str = "all"):
    """Shortest doubly critical chord.  Returns ``(distance, (ArcPosition, ArcPosition))``;
    distance is ``inf`` with witness ``None`` if there is no candidate.

    ``scope`` restricts the chords considered: ``"all"``, ``"inter"`` (between
    different components) or ``"intra"`` (within one component).
    """
    if scope not in ("all", "inter", "intra"):
        raise ValueError(f"unknown scope {scope!r}")
    link = as_link(link)
    seg = _Segments(link)
    return _dcsd(seg, scope=scope)


def _shortest_critical(seg: _Segments, radius: float, scope: str):
    """Shortest qualifying chord among segment pairs within ``radius``.

    Pairs are streamed; a pair is retained only if it passes the widest
    possible window and is no longer than the shortest exact chord so far,
    which keeps memory bounded without changing the result.
    """
    keep_i, keep_j, keep_s, keep_t, keep_d, keep_x = [], [], [], [], [], []
    d_exact = math.inf
    for i, j in _candidate_pairs(seg, radius):
        keep = ~seg.adjacent(i, j)
        if scope == "inter":
            keep &= seg.comp[i] != seg.comp[j]
        elif scope == "intra":
            keep &= seg.comp[i] == seg.comp[j]
        i, j = i[keep], j[keep]
        if not len(i):
            continue
        s, t, dist = segment_closest_points(seg.p0[i], seg.d[i], seg.p0[j], seg.d[j])
        near = dist <= min(radius, d_exact)
        i, j, s, t, dist = i[near], j[near], s[near], t[near], dist[near]
        exact = _chord_is_critical(seg, i, j, s, t, dist, window=0.0)
        if np.any(exact):
            d_exact = min(d_exact, float(dist[exact].min()))
        loose = exact | _chord_is_critical(seg, i, j, s, t, dist, window=1.0)
        loose &= dist <= d_exact
        keep_i.append(i[loose])
        keep_j.append(j[loose])
        keep_s.append(s[loose])
        keep_t.append(t[loose])
        keep_d.append(dist[loose])
        keep_x.append(exact[loose])
    if not np.isfinite(d_exact):
        return None
    i, j, s, t, dist, exact = (np.concatenate(a) for a in (keep_i, keep_j, keep_s, keep_t, keep_d, keep_x))
    # adaptive angular window: delta = arcsin(edge / dcsd estimate)
    edge = np.maximum(seg.len[i], seg.len[j])
    crit = _chord_is_critical(seg, i, j, s, t, dist, window=edge / max(d_exact, 1e-300))
    crit &= dist > 0.5 * d_exact
    crit |= exact
    k = int(np.argmin(np.where(crit, dist, np.inf)))
    return float(dist[k]), i[k], j[k], s[k], t[k]


def _dcsd(seg: _Segments, radius=None, scope="all", give_up_above=math.inf):
    bbox = np.ptp(np.concatenate([seg.p0, seg.p1]), axis=0)
    diag = float(np.linalg.norm(bbox))
    if radius is None or not np.isfinite(radius):
        radius = 4.0 * float(seg.len.max())
    radius = min(max(radius, 4.0 * float(seg.len.max())), 2.0 * diag + 1.0)
    while True:
        found = _shortest_critical(seg, radius, scope)
        if found is not None:
            d, a, b, sa, tb = found
            wa = ArcPosition(int(seg.comp[a]), float(seg.start_s[a] + sa * seg.len[a]))
            wb = ArcPosition(int(seg.comp[b]), float(seg.start_s[b] + tb * seg.len[b]))
            return d, (wa, wb)
        if radius > 2.0 * diag or radius > give_up_above:
            return math.inf, None
        radius *= 2.0


def thickness(link) -> ThicknessReport:
    """Thickness, ropelength and the geometric feature that limits them."""
    link = as_link(link)
    mr, mr_where = min_rad(link)
    # start the pruned search at the chord length that would compete with minRad
    dc, dc_where = _dcsd(_Segments(link), radius=2.0 * mr * (1 + 1e-9))
    total = link.length()
    if mr <= dc / 2.0:
        tau, kind, witness = mr, WitnessKind.MIN_RAD_VERTEX, mr_where
    else:
        tau, kind, witness = dc / 2.0, WitnessKind.DOUBLY_CRITICAL_CHORD, dc_where
    rope = total / tau if tau > 0 else math.inf
    return ThicknessReport(tau, rope, total, kind, witness, mr, dc)


def ropelength(link) -> float:
    return thickness(link).ropelength


def thickness_value(link) -> float:
    """Thickness only; skips the dcsd search once it cannot beat minRad."""
    link = as_link(link)
    mr, _ = min_rad(link)
    bound = 2.0 * mr * (1 + 1e-9)
    dc, _ = _dcsd(_Segments(link), radius=bound, give_up_above=bound)
    return min(mr, dc / 2.0)


def normalize(link, target: float = 1.0) -> PolyLink:
    """Rescale so that the measured thickness equals ``target``."""
    link = as_link(link)
    return link.scaled(target / thickness(link).thickness)


# ---------------------------------------------------------------------------
# oracle and local thickness


def thickness_bruteforce(link) -> float:
    """Minimum circumradius over all triples of distinct vertices.

    For each anchor ``a`` the triples ``a < b < c`` are scored at once from
    the Gram matrix of ``v - v[a]``: twice the triangle area is
    ``sqrt(|u|^2 |w|^2 - (u.w)^2)``.  A circumradius is at least half of
    every side, so only vertices within twice the running minimum of the
    anchor can improve it.
    """
    link = as_link(link)
    v = link.all_vertices()
    n = len(v)
    best = math.inf
    for c in link:
        w = c.vertices
        r = circumradii(np.roll(w, 1, axis=0), w, np.roll(w, -1, axis=0))
        best = min(best, float(r.min()))
    for a in range(n - 2):
        u = v[a + 1:] - v[a]
        sq = np.einsum("ij,ij->i", u, u)
        if np.isfinite(best):
            u = u[sq <= 4.0 * best * best * (1 + 1e-12)]
        if len(u) < 2:
            continue
        g = u @ u.T
        sq = np.diag(g).copy()
        outer = np.outer(sq, sq)
        area2 = outer - g * g
        dbc2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * g, 0.0)
        m2 = np.maximum(np.maximum(sq[:, None], sq[None, :]), dbc2)
        ok = np.triu(area2 > (2.0 * COLLINEAR_EPS) ** 2 * m2 * m2, k=1)
        if not ok.any():
            continue
        r2 = outer[ok] * dbc2[ok] / (4.0 * area2[ok])
        best = min(best, math.sqrt(float(r2.min())))
    return best


LOCAL_WINDOW = 12


def local_thickness(link, at: ArcPosition) -> float:
    """Local thickness at a point: smallest circle tangent to the curve at some
    other vertex and passing through the point, combined with minRad near it.

    Vertices within ``LOCAL_WINDOW`` edges of the point contribute their
    polygonal radius of curvature instead of a tangent circle, since a vertex
    tangent is not tangent to the polygon at the point itself.
    """
    link = as_link(link)
    link.validate_position(at)
    comp = link[at.component]
    x = comp.point_at(at.s)
    lens = comp.edge_lengths()
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    i = min(int(np.searchsorted(cum, at.s, side="right")) - 1, len(lens) - 1)
    n = len(comp)
    idx = np.arange(n)
    # cyclic index distance to the nearer endpoint of edge i
    gap = np.minimum.reduce([(idx - i) % n, (i - idx) % n, (idx - i - 1) % n, (i + 1 - idx) % n])
    local = gap <= LOCAL_WINDOW
    best = math.inf
    for ci, c in enumerate(link):
        tang = vertex_tangents(c)
        dy = x - c.vertices
        d2 = np.einsum("ij,ij->i", dy, dy)
        along = np.einsum("ij,ij->i", dy, tang)
        perp = np.sqrt(np.maximum(d2 - along * along, 0.0))
        valid = d2 > 1e-24
        if ci == at.component:
            valid &= ~local
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(perp > 1e-14 * np.sqrt(d2), d2 / (2.0 * perp), np.inf)
        r = np.where(valid, r, np.inf)
        best = min(best, float(r.min()))
    theta = turning_angles(comp)
    emin = np.minimum(lens, np.roll(lens, 1))
    with np.errstate(divide="ignore"):
        rad = np.where(theta > 0, emin / (2.0 * np.tan(theta / 2.0)), np.inf)
    return min(best, float(rad[local].min()))


def tangent_radius_at(link, i_comp: int, vertex: int, y) -> float:
    """``tangent_circle_radius`` with the vertex tangent of the polygon."""
    link = as_link(link)
    c = link[i_comp]
    return tangent_circle_radius(c.vertices[vertex], vertex_tangents(c)[vertex], y)


def min_distance_between(link, i: int, j: int) -> float:
    """Minimum distance between two different components (segment-exact)."""
    link = as_link(link)
    a, b = link[i], link[j]
    na, nb = len(a), len(b)
    ia, ib = np.meshgrid(np.arange(na), np.arange(nb), indexing="ij")
    ia, ib = ia.ravel(), ib.ravel()
    _, _, d = segment_closest_points(a.vertices[ia], a.edges()[ia], b.vertices[ib], b.edges()[ib])
    return float(d.min())


def point_curve_distance(points, link) -> np.ndarray:
    """Distance from each query point to the nearest point of the link."""
    link = as_link(link)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    best = np.full(len(pts), np.inf)
    for c in link:
        v, e = c.vertices, c.edges()
        ee = np.einsum("ij,ij->i", e, e)
        for start in range(0, len(pts), 2048):
            p = pts[start:start + 2048]
            r = p[:, None, :] - v[None, :, :]
            t = np.clip(np.einsum("pij,ij->pi", r, e) / ee, 0.0, 1.0)
            q = r - t[..., None] * e[None]
            d = np.sqrt(np.einsum("pij,pij->pi", q, q)).min(axis=1)
            best[start:start + 2048] = np.minimum(best[start:start + 2048], d)
    return best


def inter_component_distance(link) -> Optional[float]:
    link = as_link(link)
    if len(link) < 2:
        return None
    return min(
        min_distance_between(link, i, j)
        for i in range(len(link)) for j in range(i + 1, len(link))
    )
