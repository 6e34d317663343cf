"""Knot diagrams (PD codes) compiled into cubic-lattice links.

Layout.  The diagram graph (crossings as vertices) is given an st-ordering,
which fixes the row of every crossing, and each edge gets the column of the
face to its left in a longest-path numbering of the dual.  This is a
visibility drawing: crossings are horizontal bars, edges are vertical runs,
and nothing meets except at bar attachments.  Lattice coordinates are
``(2 * row, layer, column position)``; edges run on layer 1.  At a crossing
the under strand runs along the bar on layer 0 and the over strand on
layer 2, which realizes the crossing without other contacts.

PD convention: ``X[a, b, c, d]`` lists labels counterclockwise starting at
the incoming under strand, so ``a -> c`` passes under ``b``/``d``.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curve import PolyLink

QUARTER_SEGMENTS = 16


class PDError(ValueError):
    """Malformed or unsupported PD code."""


class LatticeError(ValueError):
    pass


_TUPLE = re.compile(r"X\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]")


@dataclass
class Diagram:
    crossings: list
    head: dict = field(default_factory=dict)
    tail: dict = field(default_factory=dict)
    components: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def labels(self) -> list:
        return sorted(self.head)

    def slots(self, label):
        """The two ``(crossing, slot)`` occurrences of ``label``."""
        return [(v, k) for v, c in enumerate(self.crossings) for k, x in enumerate(c) if x == label]

    def sign(self, v: int) -> int:
        """Right-handed crossing sign: +1 when the over strand runs d -> b."""
        return 1 if self.tail[self.crossings[v][1]] == (v, 1) else -1

    def component_of(self, label) -> int:
        for i, comp in enumerate(self.components):
            if label in comp:
                return i
        raise KeyError(label)

    @property
    def num_components(self) -> int:
        return len(self.components)

    def linking_matrix(self) -> np.ndarray:
        m = len(self.components)
        lk = np.zeros((m, m))
        for v, (a, b, _c, _d) in enumerate(self.crossings):
            i, j = self.component_of(a), self.component_of(b)
            if i != j:
                lk[i, j] += 0.5 * self.sign(v)
                lk[j, i] += 0.5 * self.sign(v)
        return lk

    def writhe(self) -> int:
        return sum(self.sign(v) for v in range(self.n))

    def faces(self) -> list:
        """Face boundaries as lists of darts ``(crossing, slot)``; each dart
        leaves its crossing with the face on its left."""
        other = {}
        for lab in self.labels:
            p, q = self.slots(lab)
            other[p], other[q] = q, p
        seen, faces = set(), []
        for v in range(self.n):
            for k in range(4):
                if (v, k) in seen:
                    continue
                face, d = [], (v, k)
                while d not in seen:
                    seen.add(d)
                    face.append(d)
                    w, kk = other[d]
                    d = (w, (kk - 1) % 4)
                faces.append(face)
        return faces

    def determinant(self) -> int:
        """Determinant |Delta(-1)| from the coloring matrix."""
        from .invariants import coloring_determinant

        parent = {lab: lab for lab in self.labels}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, c, d in self.crossings:
            parent[find(b)] = find(d)
        roots = sorted({find(x) for x in self.labels})
        index = {r: i for i, r in enumerate(roots)}
        rows = [(index[find(b)], index[find(a)], index[find(c)]) for a, b, c, d in self.crossings]
        return coloring_determinant(rows, len(roots))


def parse_pd(text: str) -> Diagram:
    """Parse ``X[a,b,c,d]`` tuples separated by whitespace or commas."""
    if text is None or not text.strip():
        raise PDError("empty PD code")
    body = text.strip()
    if body.startswith("PD[") and body.endswith("]"):
        body = body[3:-1]
    crossings = []
    pos = 0
    for m in _TUPLE.finditer(body):
        gap = body[pos:m.start()]
        if gap.strip(" \t\r\n,"):
            raise PDError(f"malformed PD text near {gap.strip()[:20]!r}")
        crossings.append(tuple(int(g) for g in m.groups()))
        pos = m.end()
    if body[pos:].strip(" \t\r\n,"):
        raise PDError(f"malformed PD text near {body[pos:].strip()[:20]!r}")
    if not crossings:
        raise PDError("no crossings found")
    return diagram_from_crossings(crossings)


def diagram_from_crossings(crossings) -> Diagram:
    crossings = [tuple(int(x) for x in c) for c in crossings]
    counts = defaultdict(int)
    for c in crossings:
        if len(c) != 4:
            raise PDError("each crossing needs four labels")
        for x in c:
            counts[x] += 1
    bad = sorted(lab for lab, c in counts.items() if c != 2)
    if bad:
        raise PDError(f"labels must appear exactly twice; offending: {bad}")
    d = Diagram(crossings)
    _orient(d)
    return d


def _orient(d: Diagram) -> None:
    occ = defaultdict(list)
    for v, c in enumerate(d.crossings):
        for k, x in enumerate(c):
            occ[x].append((v, k))

    def set_head(lab, slot):
        p, q = occ[lab]
        tail = q if slot == p else p
        if lab in d.head:
            if d.head[lab] != slot:
                raise PDError(f"inconsistent orientation for label {lab}")
            return False
        d.head[lab], d.tail[lab] = slot, tail
        return True

    for v, (a, b, c, dd) in enumerate(d.crossings):
        set_head(a, (v, 0))
    for v, (a, b, c, dd) in enumerate(d.crossings):
        if d.head.get(c) == (v, 2):
            raise PDError(f"label {c} cannot enter crossing {v} on the outgoing under slot")
        if c not in d.head:
            p, q = occ[c]
            set_head(c, q if p == (v, 2) else p)

    def propagate():
        changed = True
        while changed:
            changed = False
            for v, (_a, b, _c, dd) in enumerate(d.crossings):
                for x, y, kx, ky in ((b, dd, 1, 3), (dd, b, 3, 1)):
                    if x in d.head and d.head[x] == (v, kx):
                        p, q = occ[y]
                        other = q if p == (v, ky) else p
                        changed |= set_head(y, other)
                    if x in d.head and d.tail[x] == (v, kx):
                        changed |= set_head(y, (v, ky))

    propagate()
    for v, (_a, b, _c, dd) in enumerate(d.crossings):
        if b not in d.head:
            # strand never passes under: labels increase along the orientation
            if dd == b + 1 or (b > dd and b != dd + 1):
                set_head(b, (v, 1))
            else:
                set_head(dd, (v, 3))
            propagate()

    comps, seen = [], set()
    for lab in sorted(d.head):
        if lab in seen:
            continue
        comp, x = [], lab
        while x not in seen:
            seen.add(x)
            comp.append(x)
            v, k = d.head[x]
            x = d.crossings[v][(k + 2) % 4]
        comps.append(comp)
    d.components = comps


def remove_kinks(d: Diagram) -> Diagram:
    """Undo Reidemeister-I kinks (a label occupying adjacent slots of one
    crossing).  Every remaining crossing keeps its labels."""
    crossings = list(d.crossings)
    changed = True
    while changed and crossings:
        changed = False
        for idx, c in enumerate(crossings):
            for k in range(4):
                if c[k] == c[(k + 1) % 4]:
                    p, q = c[(k + 2) % 4], c[(k + 3) % 4]
                    rest = crossings[:idx] + crossings[idx + 1:]
                    if p == q:
                        crossings = rest
                    else:
                        crossings = [tuple(q if x == p else x for x in cc) for cc in rest]
                    changed = True
                    break
            if changed:
                break
    if not crossings:
        return Diagram([])
    return diagram_from_crossings(crossings)


# ---------------------------------------------------------------------------
# layout


@dataclass
class LatticeLink:
    cycles: list
    levels: dict = field(default_factory=dict)
    n: int = 0
    edge_lengths: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return sum(len(c) for c in self.cycles)

    @property
    def bounding_box(self):
        pts = np.vstack([np.asarray(c) for c in self.cycles])
        return pts.min(axis=0), pts.max(axis=0)

    def extents(self) -> tuple:
        lo, hi = self.bounding_box
        return tuple(int(x) for x in hi - lo)

    def translated(self, offset) -> "LatticeLink":
        off = np.asarray(offset, dtype=int)
        return LatticeLink([[tuple(int(a) for a in np.asarray(p) + off) for p in c] for c in self.cycles],
                           dict(self.levels), self.n, dict(self.edge_lengths))

    def as_polylink(self) -> PolyLink:
        return PolyLink([np.asarray(c, dtype=float) for c in self.cycles])


def box_limit(n: int) -> tuple:
    """Allowed extents, sorted: two sides of 2n-2 and one of 2n+2."""
    return tuple(sorted((2 * n - 2, 2 * n - 2, 2 * n + 2)))


def _st_numbering(nv: int, adj: dict, s: int, t: int, first_edge) -> list:
    """Tarjan's st-ordering of a 2-connected multigraph; ``adj[v]`` lists
    ``(w, edge_id)``.  The DFS starts along ``first_edge`` from s to t."""
    pre = {}
    parent = {}
    parent_edge = {}
    low = {}
    order = []
    counter = 0

    pre[s] = counter
    counter += 1
    order.append(s)
    parent[t], parent_edge[t] = s, first_edge
    stack = [(t, iter(adj[t]))]
    pre[t] = counter
    counter += 1
    order.append(t)
    low[s] = s
    low[t] = t
    while stack:
        v, it = stack[-1]
        advanced = False
        for w, eid in it:
            if eid == parent_edge.get(v):
                continue
            if w not in pre:
                pre[w] = counter
                counter += 1
                order.append(w)
                parent[w], parent_edge[w] = v, eid
                low[w] = w
                stack.append((w, iter(adj[w])))
                advanced = True
                break
            if pre[w] < pre[low[v]]:
                low[v] = w
        if advanced:
            continue
        stack.pop()
        if stack:
            u = stack[-1][0]
            if pre[low[v]] < pre[low[u]]:
                low[u] = low[v]
    if len(order) != nv:
        raise PDError("diagram is not connected")
    for v in order[2:]:
        if pre[low[v]] >= pre[parent[v]]:
            raise PDError("diagram graph has a cut vertex (nugatory crossing); reduce it first")
    # list insertion
    nxt, prv = {s: t, t: None}, {s: None, t: s}
    sign = {s: -1}
    for v in order[2:]:
        p = parent[v]
        if sign[low[v]] == -1:
            a = prv[p]
            prv[v], nxt[v] = a, p
            prv[p] = v
            if a is not None:
                nxt[a] = v
            sign[p] = 1
        else:
            b = nxt[p]
            nxt[v], prv[v] = b, p
            nxt[p] = v
            if b is not None:
                prv[b] = v
            sign[p] = -1
    head = s
    while prv[head] is not None:
        head = prv[head]
    out = []
    while head is not None:
        out.append(head)
        head = nxt[head]
    return out


@dataclass
class _Layout:
    row: dict
    column: dict  # label -> column
    left: dict
    right: dict
    tail_v: dict  # label -> lower crossing
    head_v: dict
    width: int


def _layout(d: Diagram, outer: int, outer_dart) -> _Layout:
    faces = d.faces()
    face_of = {}
    for fi, f in enumerate(faces):
        for dart in f:
            face_of[dart] = fi
    v0, k0 = outer_dart
    lab0 = d.crossings[v0][k0]
    slots = {lab: d.slots(lab) for lab in d.labels}
    s = v0
    (p, q) = slots[lab0]
    t = q[0] if p == (v0, k0) else p[0]
    if s == t:
        raise PDError("outer edge is a loop")
    adj = defaultdict(list)
    for lab, ((a, _ka), (b, _kb)) in slots.items():
        adj[a].append((b, lab))
        adj[b].append((a, lab))
    for v in adj:
        adj[v].sort(key=lambda x: (x[1] != lab0, x[0], x[1]))
    order = _st_numbering(d.n, adj, s, t, lab0)
    row = {v: i for i, v in enumerate(order)}

    S_STAR, T_STAR = "s*", "t*"
    left, right, tail_v, head_v = {}, {}, {}, {}
    for lab, (pa, pb) in slots.items():
        lo, hi = (pa, pb) if row[pa[0]] < row[pb[0]] else (pb, pa)
        tail_v[lab], head_v[lab] = lo, hi
        lf, rf = face_of[lo], face_of[hi]
        if lab == lab0 and lf == outer:
            lf = S_STAR
        elif lab == lab0:
            raise PDError("outer dart orientation mismatch")
        if rf == outer:
            rf = T_STAR
        if lf == outer:
            raise PDError("outer face on the left of a non-outer edge")
        left[lab], right[lab] = lf, rf
    succ = defaultdict(set)
    indeg = defaultdict(int)
    nodes = {S_STAR, T_STAR} | set(left.values()) | set(right.values())
    for lab in slots:
        a, b = left[lab], right[lab]
        if b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    depth = {x: 0 for x in nodes}
    ready = [x for x in nodes if indeg[x] == 0]
    seen = 0
    while ready:
        x = ready.pop()
        seen += 1
        for y in succ[x]:
            depth[y] = max(depth[y], depth[x] + 1)
            indeg[y] -= 1
            if indeg[y] == 0:
                ready.append(y)
    if seen != len(nodes):
        raise PDError("dual orientation has a cycle; PD is not a planar diagram")
    column = {lab: depth[left[lab]] for lab in slots}
    return _Layout(row, column, left, right, tail_v, head_v, max(column.values()))


def _assemble(d: Diagram, lay: _Layout) -> LatticeLink:
    n = d.n
    # attachment point (lattice X along the bar) for every (crossing, slot)
    attach = {}
    jog = set()
    for v in range(n):
        incident = [(k, d.crossings[v][k]) for k in range(4)]
        ins = [(k, lab) for k, lab in incident if lay.head_v[lab] == (v, k)]
        outs = [(k, lab) for k, lab in incident if lay.tail_v[lab] == (v, k)]
        for k, lab in ins:
            attach[(v, k)] = 2 * lay.column[lab]
        taken = {attach[(v, k)] for k, _ in ins}
        for k, lab in outs:
            x = 2 * lay.column[lab]
            if x in taken:
                x += 1
                jog.add(lab)
            attach[(v, k)] = x

    def P(row_coord, layer, x):
        return (int(row_coord), int(layer), int(x))

    pieces = {}
    edge_len = {}
    for lab in d.labels:
        (tv, tk), (hv, hk) = lay.tail_v[lab], lay.head_v[lab]
        y0, y1 = 2 * lay.row[tv], 2 * lay.row[hv]
        col = 2 * lay.column[lab]
        path = []
        xa = attach[(tv, tk)]
        path.append(P(y0, 1, xa))
        if lab in jog:
            path.append(P(y0 + 1, 1, xa))
            path.append(P(y0 + 1, 1, col))
            start = y0 + 2
        else:
            start = y0 + 1
        for y in range(start, y1 + 1):
            path.append(P(y, 1, col))
        # path runs in increasing row; orient along the label
        if d.tail[lab] != (tv, tk):
            path = path[::-1]
        pieces[("edge", lab)] = path
        edge_len[lab] = len(path) - 1

    for v in range(n):
        y = 2 * lay.row[v]
        for k_in, layer in ((0, 0), (1, 2), (3, 2)):
            lab_in = d.crossings[v][k_in]
            if d.head[lab_in] != (v, k_in):
                continue
            k_out = (k_in + 2) % 4
            x0, x1 = attach[(v, k_in)], attach[(v, k_out)]
            step = 1 if x1 > x0 else -1
            path = [P(y, 1, x0)]
            path += [P(y, layer, x) for x in range(x0, x1 + step, step)]
            path.append(P(y, 1, x1))
            pieces[("strand", v)] = pieces.get(("strand", v), []) + [(k_in, path)]

    cycles = []
    for comp in d.components:
        pts = []
        for lab in comp:
            epath = pieces[("edge", lab)]
            pts.extend(epath[:-1])
            v, k = d.head[lab]
            for k_in, spath in pieces[("strand", v)]:
                if k_in == k:
                    pts.extend(spath[:-1])
        cycles.append(pts)
    return LatticeLink(cycles, {lab: 1 for lab in d.labels}, n, edge_len)


def embed_lattice(d: Diagram) -> LatticeLink:
    """Lattice embedding of a diagram; the smallest over all choices of
    outer face and outer edge that passes verification."""
    if not isinstance(d, Diagram):
        d = diagram_from_crossings(d)
    reduced = remove_kinks(d)
    if reduced.n == 0:
        return LatticeLink([[(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)]], {}, d.n, {})
    best, err = None, None
    for fi, face in enumerate(reduced.faces()):
        for dart in face:
            try:
                lay = _layout(reduced, fi, dart)
            except PDError as exc:
                err = exc
                continue
            cand = _assemble(reduced, lay)
            rep = verify_lattice(cand, n=reduced.n)
            if not rep.ok:
                err = LatticeError(f"layout failed verification: {rep.failures}")
                continue
            key = (not rep.box_ok, cand.length, sorted(cand.extents()))
            if best is None or key < best[0]:
                best = (key, cand)
    if best is None:
        raise err or LatticeError("no layout found")
    out = best[1]
    lo, _ = out.bounding_box
    out = out.translated(-lo)
    out.n = d.n
    return out


@dataclass
class LatticeReport:
    closed: bool
    unit_steps: bool
    self_avoiding: bool
    box_ok: bool
    extents: tuple
    length: int
    length_bound_ok: bool
    edge_bound_ok: bool
    failures: list

    @property
    def ok(self) -> bool:
        return self.closed and self.unit_steps and self.self_avoiding

    @property
    def all_ok(self) -> bool:
        return self.ok and self.box_ok and self.length_bound_ok and self.edge_bound_ok

    def as_dict(self):
        return {
            "closed": self.closed, "unit_steps": self.unit_steps, "self_avoiding": self.self_avoiding,
            "box_ok": self.box_ok, "extents": list(self.extents), "length": self.length,
            "length_bound_ok": self.length_bound_ok, "edge_bound_ok": self.edge_bound_ok,
            "failures": self.failures,
        }


def verify_lattice(l: LatticeLink, n: Optional[int] = None) -> LatticeReport:
    """Independent checks: integer unit steps around every closed cycle, no
    repeated lattice point, box within the size allowed for ``n`` crossings,
    total length below ``12 n^2`` and every edge path below ``6 n``."""
    n = l.n if n is None else n
    failures = []
    unit = closed = True
    seen = set()
    dup = False
    total = 0
    for ci, c in enumerate(l.cycles):
        arr = np.asarray(c)
        if len(arr) < 4 or not np.issubdtype(arr.dtype, np.integer):
            closed = False
            failures.append(f"cycle {ci} degenerate or non-integer")
            continue
        steps = np.abs(np.roll(arr, -1, axis=0) - arr).sum(axis=1)
        if not np.all(steps == 1):
            if steps[-1] != 1:
                closed = False
                failures.append(f"cycle {ci} does not close with a unit step")
            if not np.all(steps[:-1] == 1):
                unit = False
                failures.append(f"cycle {ci} has non-unit steps")
        total += len(arr)
        for p in map(tuple, arr):
            if p in seen:
                dup = True
            seen.add(p)
    if dup:
        failures.append("lattice point used twice")
    ext = tuple(sorted(l.extents())) if l.cycles else (0, 0, 0)
    lim = box_limit(n) if n >= 1 else (0, 0, 0)
    box_ok = all(e <= m for e, m in zip(ext, lim))
    if not box_ok:
        failures.append(f"extents {ext} exceed {lim}")
    length_ok = total < 12 * n * n if n >= 1 else True
    edge_ok = all(v < 6 * n for v in l.edge_lengths.values()) if n >= 1 else True
    if not length_ok:
        failures.append(f"length {total} >= 12 n^2")
    if not edge_ok:
        failures.append("an edge path has length >= 6 n")
    return LatticeReport(closed, unit, not dup, box_ok, ext, total, length_ok, edge_ok, failures)


def smooth_corners(l: LatticeLink, segments: int = QUARTER_SEGMENTS):
    """Round each right-angle corner with a quarter circle of radius 1/2.

    Returns ``(link, certificate)``; the certificate records the lattice
    length ``k`` and the bound ``ropelength <= 2k`` implied by thickness 1/2.
    """
    comps = []
    for c in l.cycles:
        v = np.asarray(c, dtype=float)
        m = len(v)
        pts = []
        for i in range(m):
            p = v[i]
            u = p - v[i - 1]
            w = v[(i + 1) % m] - p
            if np.allclose(u, w):
                pts.append(p)
                continue
            if np.allclose(u, -w):
                raise LatticeError("lattice cycle reverses direction")
            center = p - 0.5 * u + 0.5 * w
            a = -0.5 * w
            b = -0.5 * u
            for j in range(segments + 1):
                phi = 0.5 * math.pi * j / segments
                pts.append(center + math.cos(phi) * a + math.sin(phi) * (-b))
        pts = np.asarray(pts)
        keep = np.ones(len(pts), dtype=bool)
        nxt = np.roll(pts, -1, axis=0)
        keep &= np.linalg.norm(nxt - pts, axis=1) > 1e-12
        comps.append(pts[keep])
    k = l.length
    cert = {
        "lattice_length": k,
        "radius": 0.5,
        "thickness_claim": 0.5,
        "ropelength_bound": 2 * k,
        "quadratic_bound": 24 * l.n * l.n,
    }
    return PolyLink(comps), cert


PD_CORPUS = {
    "trefoil": "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]",
    "figure_eight": "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]",
    "hopf": "X[4,1,3,2] X[2,3,1,4]",
    "cinquefoil": "X[1,6,2,7] X[3,8,4,9] X[5,10,6,1] X[7,2,8,3] X[9,4,10,5]",
    "three_twist": "X[1,4,2,5] X[3,8,4,9] X[5,10,6,1] X[9,6,10,7] X[7,2,8,3]",
}
