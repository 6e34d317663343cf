"""Linking numbers, writhe, total curvature and the invariant record.

Linking numbers are computed two independent ways: the Gauss double integral
(midpoint quadrature, subdivided for close edge pairs) and signed crossing
counts in a projection.  Writhe uses the exact solid-angle formula for each
pair of segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curve import Component, PolyLink, as_link, turning_angles
from .thickness import min_distance_between, segment_closest_points


class InvariantError(ValueError):
    pass


class DegenerateProjectionError(InvariantError):
    """Projection direction is not generic; perturb it and retry."""


# ---------------------------------------------------------------------------
# Gauss integrals


def _gauss_midpoint(p, dp, q, dq):
    r = p[:, None, :] - q[None, :, :]
    cr = np.cross(dp[:, None, :], dq[None, :, :])
    num = np.einsum("ijk,ijk->ij", r, cr)
    den = np.linalg.norm(r, axis=2) ** 3
    return num / den


def linking_number_gauss(a: Component, b: Component, refine: int = 4) -> tuple[float, int]:
    """Gauss linking integral of two disjoint components.

    Returns ``(raw, rounded)``.  Edge pairs closer than four edge lengths are
    re-integrated with ``refine x refine`` sub-segments.
    """
    ea, eb = a.edges(), b.edges()
    scale = max(a.edge_lengths().max(), b.edge_lengths().max())
    # contact up to rounding counts as touching
    if min_distance_between(PolyLink([a, b]), 0, 1) <= 1e-12 * scale:
        raise InvariantError("components touch; linking number undefined")
    ma = a.vertices + 0.5 * ea
    mb = b.vertices + 0.5 * eb
    k = _gauss_midpoint(ma, ea, mb, eb)
    h = max(a.edge_lengths().max(), b.edge_lengths().max())
    dist = np.linalg.norm(ma[:, None, :] - mb[None, :, :], axis=2)
    close = np.argwhere(dist < 4.0 * h)
    if len(close):
        f = (np.arange(refine) + 0.5) / refine
        for i, j in close:
            sp = a.vertices[i] + np.outer(f, ea[i])
            sq = b.vertices[j] + np.outer(f, eb[j])
            sub = _gauss_midpoint(sp, ea[i][None] / refine, sq, eb[j][None] / refine)
            k[i, j] = sub.sum()
    raw = float(k.sum() / (4.0 * math.pi))
    return raw, int(round(raw))


def _solid_angle_pairs(p1, p2, p3, p4):
    """Exact Gauss integral (times 4*pi) for segment pairs p1p2, p3p4."""
    r13, r14, r23, r24 = p3 - p1, p4 - p1, p3 - p2, p4 - p2

    def unit(v):
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(n > 1e-300, v / n, 0.0)

    n1 = unit(np.cross(r13, r14))
    n2 = unit(np.cross(r14, r24))
    n3 = unit(np.cross(r24, r23))
    n4 = unit(np.cross(r23, r13))

    def asin_dot(x, y):
        return np.arcsin(np.clip(np.einsum("...k,...k->...", x, y), -1.0, 1.0))

    omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1)
    sign = np.sign(np.einsum("...k,...k->...", np.cross(p4 - p3, p2 - p1), r13))
    return omega * sign


def linking_number_exact(a: Component, b: Component) -> float:
    """Gauss integral via the exact per-segment-pair solid angle."""
    va, vb = a.vertices, b.vertices
    p1, p2 = va[:, None, :], np.roll(va, -1, axis=0)[:, None, :]
    p3, p4 = vb[None, :, :], np.roll(vb, -1, axis=0)[None, :, :]
    return float(_solid_angle_pairs(p1, p2, p3, p4).sum() / (4.0 * math.pi))


def writhe(k: Component) -> float:
    """Writhe: Gauss self-integral over non-adjacent segment pairs."""
    v = k.vertices
    n = len(v)
    nxt = np.roll(v, -1, axis=0)
    total = 0.0
    for i in range(n - 2):
        j = np.arange(i + 2, n if i > 0 else n - 1)
        if len(j) == 0:
            continue
        om = _solid_angle_pairs(v[i][None], nxt[i][None], v[j], nxt[j])
        total += float(np.nansum(om))
    return 2.0 * total / (4.0 * math.pi)


def total_curvature(k: Component) -> float:
    """Sum of exterior turning angles."""
    return float(turning_angles(k).sum())


# ---------------------------------------------------------------------------
# projections


def _projection_frame(direction):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return d, e1, e2


def projected_crossings(a: Component, b: Component, direction, same: bool = False):
    """Crossings of the projections of ``a`` and ``b`` onto the plane normal
    to ``direction`` (viewer at ``+inf * direction``).

    Returns a list of ``(i, s, j, t, a_over, sign)`` where ``i, j`` are segment
    indices with parameters ``s, t``; ``sign`` is the usual right-handed
    crossing sign for the orientations of the two strands.
    """
    d, e1, e2 = _projection_frame(direction)
    va, vb = a.vertices, b.vertices
    pa = np.c_[va @ e1, va @ e2]
    pb = np.c_[vb @ e1, vb @ e2]
    ha, hb = va @ d, vb @ d
    da = np.roll(pa, -1, axis=0) - pa
    db = np.roll(pb, -1, axis=0) - pb
    dha = np.roll(ha, -1) - ha
    dhb = np.roll(hb, -1) - hb
    na, nb = len(pa), len(pb)
    out = []
    for i in range(na):
        r = pb - pa[i]
        den = da[i, 0] * db[:, 1] - da[i, 1] * db[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (r[:, 0] * db[:, 1] - r[:, 1] * db[:, 0]) / den
            t = (r[:, 0] * da[i, 1] - r[:, 1] * da[i, 0]) / den
        js = np.arange(nb)
        ok = (s >= 0) & (s < 1) & (t >= 0) & (t < 1)
        if same:
            ok &= (js > i + 1) & ~((i == 0) & (js == nb - 1))
        for j in js[ok]:
            si, tj = float(s[j]), float(t[j])
            if abs(den[j]) < 1e-12 or min(si, 1 - si, tj, 1 - tj) < 1e-9:
                raise DegenerateProjectionError("projection direction is not generic")
            za = ha[i] + si * dha[i]
            zb = hb[j] + tj * dhb[j]
            if abs(za - zb) < 1e-12:
                raise DegenerateProjectionError("strands intersect in projection direction")
            a_over = za > zb
            cr = da[i, 0] * db[j, 1] - da[i, 1] * db[j, 0]
            # sign of (over tangent x under tangent) . direction, in plane coords
            sign = 1 if (cr > 0) == a_over else -1
            out.append((i, si, int(j), tj, bool(a_over), sign))
    return out


def linking_number_projection(a: Component, b: Component, direction) -> int:
    """Sum of crossing signs where ``a`` passes over ``b``."""
    return sum(sign for (_, _, _, _, a_over, sign) in projected_crossings(a, b, direction) if a_over)


def directional_writhe(k: Component, direction) -> int:
    """Signed self-crossing count of one projection."""
    return sum(c[5] for c in projected_crossings(k, k, direction, same=True))


def check_overcrossing(lk: int, over: int) -> None:
    """|Lk| <= Over and Lk = Over (mod 2)."""
    if abs(lk) > over:
        raise InvariantError(f"|Lk| = {abs(lk)} exceeds Over = {over}")
    if (lk - over) % 2:
        raise InvariantError("Lk and Over must have the same parity")


# ---------------------------------------------------------------------------
# invariant record

SUPPLIED_INT_KEYS = ("pov", "genus", "bridge", "linked_partition_count", "thurston_norm")


@dataclass
class LinkInvariants:
    """Computed invariants plus user-supplied ones (per component)."""

    num_components: int
    pairwise_linking: Optional[np.ndarray] = None
    writhe_per_component: Optional[list] = None
    total_curvature_per_component: Optional[list] = None
    supplied: list = field(default_factory=list)
    crossing_number: Optional[int] = None
    gauss_raw: Optional[np.ndarray] = None

    def component_supplied(self, i: int) -> dict:
        return self.supplied[i] if i < len(self.supplied) else {}

    @property
    def total_linking_per_component(self) -> Optional[list]:
        if self.pairwise_linking is None:
            return None
        lk = np.abs(np.asarray(self.pairwise_linking))
        return [int(lk[i].sum() - lk[i, i]) for i in range(self.num_components)]

    def total_linking(self, i: int) -> Optional[int]:
        sup = self.component_supplied(i).get("total_linking")
        if sup is not None:
            return abs(int(sup))
        tl = self.total_linking_per_component
        return None if tl is None else tl[i]

    def writhe(self, i: int) -> Optional[float]:
        if self.writhe_per_component is None:
            return None
        return self.writhe_per_component[i]

    def pov_lower(self, i: int) -> Optional[int]:
        """Best known lower bound on pov: supplied pov, bridge, 2 if knotted."""
        sup = self.component_supplied(i)
        vals = [sup[k] for k in ("pov", "bridge") if sup.get(k) is not None]
        if sup.get("nontrivial_knot"):
            vals.append(2)
        return max(vals) if vals else None

    def validate(self) -> None:
        for i, sup in enumerate(self.supplied):
            for key in SUPPLIED_INT_KEYS:
                val = sup.get(key)
                if val is not None and (int(val) != val or val < 0):
                    raise InvariantError(f"component {i}: {key} must be a nonnegative integer")
            if sup.get("ac") is not None and sup["ac"] < 0:
                raise InvariantError(f"component {i}: ac must be nonnegative")
            pov, bridge, ac = sup.get("pov"), sup.get("bridge"), sup.get("ac")
            if pov is not None and bridge is not None and pov < bridge:
                raise InvariantError(f"component {i}: pov must be >= bridge number")
            if sup.get("nontrivial_knot"):
                if pov is not None and pov < 2:
                    raise InvariantError(f"component {i}: nontrivial knot needs pov >= 2")
                if bridge is not None and bridge < 2:
                    raise InvariantError(f"component {i}: nontrivial knot needs bridge >= 2")
            if ac is not None and pov is not None and ac > pov:
                raise InvariantError(f"component {i}: ac must not exceed pov")
            cn = sup.get("crossing_number", self.crossing_number)
            if pov is not None and cn is not None and self.num_components == 1 and pov > cn:
                raise InvariantError(f"component {i}: pov must not exceed the crossing number")
            over = sup.get("over")
            if over is not None and self.pairwise_linking is not None:
                for j, ov in over.items():
                    check_overcrossing(int(self.pairwise_linking[i][int(j)]), int(ov))
        if self.crossing_number is not None and self.crossing_number < 0:
            raise InvariantError("crossing number must be nonnegative")

    def as_dict(self) -> dict:
        d = {"num_components": self.num_components}
        if self.pairwise_linking is not None:
            d["lk_matrix"] = np.asarray(self.pairwise_linking).astype(int).tolist()
            d["total_linking_per_component"] = self.total_linking_per_component
        if self.gauss_raw is not None:
            d["lk_raw"] = np.asarray(self.gauss_raw).tolist()
        if self.writhe_per_component is not None:
            d["writhe"] = list(self.writhe_per_component)
        if self.total_curvature_per_component is not None:
            d["total_curvature"] = list(self.total_curvature_per_component)
        if self.supplied:
            d["supplied"] = self.supplied
        if self.crossing_number is not None:
            d["crossing_number"] = self.crossing_number
        return d


def compute_invariants(link, supplied=None, crossing_number=None, with_writhe=True) -> LinkInvariants:
    link = as_link(link)
    m = len(link)
    lk = np.zeros((m, m), dtype=int)
    raw = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            r, k = linking_number_gauss(link[i], link[j])
            raw[i, j] = raw[j, i] = r
            lk[i, j] = lk[j, i] = k
    wr = [writhe(c) for c in link] if with_writhe else None
    tc = [total_curvature(c) for c in link]
    inv = LinkInvariants(m, lk, wr, tc, list(supplied or []), crossing_number, raw)
    inv.validate()
    return inv


def invariants_from_record(record: dict, link=None) -> LinkInvariants:
    """Build an invariant record from the JSON document; computed fields are
    filled from ``link`` when given, else taken from the record."""
    comps = record.get("components") or []
    cn = record.get("crossing_number")
    if link is not None:
        return compute_invariants(link, supplied=comps, crossing_number=cn)
    m = record.get("num_components", max(1, len(comps)))
    lk = record.get("lk_matrix")
    inv = LinkInvariants(
        m,
        None if lk is None else np.asarray(lk, dtype=int),
        record.get("writhe"),
        record.get("total_curvature"),
        list(comps),
        cn,
    )
    inv.validate()
    return inv


def coloring_determinant(rows: list, arcs: int) -> int:
    """|det| of the Fox coloring matrix with one row and column removed.

    ``rows`` holds ``(over, under_in, under_out)`` arc indices per crossing.
    Returns 0 when the matrix is not square (a component without
    undercrossings) and 1 for a crossingless knot.
    """
    if not rows:
        return 1 if arcs == 1 else 0
    if len(rows) != arcs:
        return 0
    m = np.zeros((len(rows), arcs))
    for r, (k, i, j) in enumerate(rows):
        m[r, k] += 2.0
        m[r, i] -= 1.0
        m[r, j] -= 1.0
    if arcs == 1:
        return 1
    sign, logdet = np.linalg.slogdet(m[1:, 1:])
    return 0 if sign == 0 else int(round(math.exp(logdet)))


def curve_determinant(link, direction=None, seed: int = 0) -> int:
    """Knot (or link) determinant read off a generic projection."""
    link = as_link(link)
    rng = np.random.default_rng(seed)
    for _attempt in range(20):
        dirn = direction if direction is not None else rng.standard_normal(3)
        try:
            events = []  # (over_comp, over_param, under_comp, under_param)
            for a in range(len(link)):
                for b in range(a, len(link)):
                    for i, s, j, t, a_over, _sign in projected_crossings(link[a], link[b], dirn, same=(a == b)):
                        pa, pb = i + s, j + t
                        if a_over:
                            events.append((a, pa, b, pb))
                        else:
                            events.append((b, pb, a, pa))
            break
        except DegenerateProjectionError:
            if direction is not None:
                raise
    else:
        raise DegenerateProjectionError("no generic projection found")

    unders = [sorted(e[3] for e in events if e[2] == c) for c in range(len(link))]
    base, arcs = [], 0
    for u in unders:
        base.append(arcs)
        arcs += max(len(u), 1)

    def arc_of(c, p):
        u = unders[c]
        if not u:
            return base[c]
        # arc k runs from under-event k to under-event k+1 (cyclically)
        k = int(np.searchsorted(u, p, side="right")) - 1
        return base[c] + (k % len(u))

    rows = []
    for oc, op, uc, up in events:
        k = unders[uc].index(up)
        out_arc = base[uc] + k
        in_arc = base[uc] + (k - 1) % len(unders[uc])
        rows.append((arc_of(oc, op), in_arc, out_arc))
    return coloring_determinant(rows, arcs)
