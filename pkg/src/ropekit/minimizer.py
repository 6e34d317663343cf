"""Ropelength descent at fixed unit thickness.

Each iteration proposes a curve-shortening move, then projects back toward
unit thickness: vertices whose polygonal radius drops below 1 are smoothed,
and segment pairs that are far apart along the curve but closer than 2 in
space are pushed apart along their common perpendicular.  A proposal is
accepted when the measured thickness stays above ``1 - tolerance`` and the
ropelength strictly drops; the accepted link is rescaled to thickness 1.

Every vertex moves by less than half the smallest distance between
non-adjacent segments, so no strand can pass through another and the link
type is preserved.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO

import numpy as np

from .curve import CurveError, PolyLink, as_link, resample_count
from .thickness import segment_closest_points, thickness_value

log = logging.getLogger(__name__)


class MinimizerError(ValueError):
    pass


@dataclass
class MinimizerParams:
    max_iter: int = 20_000
    shrink_rate: float = 0.25
    overlap_tolerance: float = 0.01
    equalize_every: int = 50
    seed: int = 0
    projection_sweeps: int = 40
    noise: float = 0.0
    vertices_per_component: Optional[int] = None
    stagnation_window: int = 100
    stagnation_rtol: float = 1e-6
    min_step: float = 1e-6
    time_limit: Optional[float] = None
    lower_bound: Optional[float] = None


@dataclass
class MinimizerState:
    current: PolyLink
    target_thickness: float = 1.0
    step: float = 0.25
    iteration: int = 0
    accepted: int = 0
    history: list = field(default_factory=list)
    stagnated: bool = False
    stop_reason: str = ""

    @property
    def ropelength(self) -> float:
        return self.history[-1][1] if self.history else math.nan


@dataclass(frozen=True)
class StepDecision:
    accepted: bool
    reason: str
    thickness: float
    ropelength: float


class _Geometry:
    """Flat vertex array with per-component index bookkeeping."""

    def __init__(self, link: PolyLink):
        self.sizes = [len(c) for c in link]
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)])
        n = self.offsets[-1]
        self.comp = np.repeat(np.arange(len(self.sizes)), self.sizes)
        idx = np.arange(n)
        local = idx - self.offsets[self.comp]
        size = np.array(self.sizes)[self.comp]
        self.nxt = self.offsets[self.comp] + (local + 1) % size
        self.prv = self.offsets[self.comp] + (local - 1) % size
        self.local = local
        self.size = size
        iu, ju = np.triu_indices(n, k=1)
        same = self.comp[iu] == self.comp[ju]
        diff = np.abs(local[iu] - local[ju])
        adj = same & ((diff <= 1) | (diff == size[iu] - 1))
        self.pi, self.pj = iu[~adj], ju[~adj]
        self.same = self.comp[self.pi] == self.comp[self.pj]

    def link(self, x) -> PolyLink:
        return PolyLink([x[a:b] for a, b in zip(self.offsets[:-1], self.offsets[1:])])


def _arc_separation(g: _Geometry, lens, s, t):
    """Arclength between the two closest points (inf for different components)."""
    starts = np.empty_like(lens)
    totals = np.empty(len(g.sizes))
    for c, (a, b) in enumerate(zip(g.offsets[:-1], g.offsets[1:])):
        starts[a:b] = np.concatenate([[0.0], np.cumsum(lens[a:b])[:-1]])
        totals[c] = lens[a:b].sum()
    pa = starts[g.pi] + s * lens[g.pi]
    pb = starts[g.pj] + t * lens[g.pj]
    gap = np.abs(pa - pb)
    total = totals[g.comp[g.pi]]
    sep = np.minimum(gap, total - gap)
    return np.where(g.same, sep, np.inf)


def _vertex_radius(g: _Geometry, x):
    """Polygonal curvature radius min(e_prev, e_next) / (2 tan(theta/2))."""
    a = x - x[g.prv]
    b = x[g.nxt] - x
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    cosang = np.clip(np.einsum("ij,ij->i", a, b) / (la * lb), -1.0, 1.0)
    theta = np.arccos(cosang)
    with np.errstate(divide="ignore"):
        return np.minimum(la, lb) / (2.0 * np.tan(theta / 2.0))


def _project(g: _Geometry, x, sweeps: int, margin: float = 1e-3, refresh: int = 8,
             settle: float = 1e-6):
    """Push toward polygonal radius >= 1 and far-pair distance >= 2.

    Vertices within ``margin`` of the radius constraint are smoothed; pairs
    closer than 2 are pushed to ``2 (1 + margin)``.  Pair distances are evaluated on a near subset that is
    rebuilt every ``refresh`` sweeps.
    """
    x = x.copy()
    reach = math.pi
    goal = 2.0 * (1.0 + margin)
    sub = None
    for sweep in range(sweeps):
        before = x
        rad = _vertex_radius(g, x)
        bad = rad < 1.0 + margin
        if np.any(bad):
            mid = 0.5 * (x[g.prv] + x[g.nxt])
            frac = np.clip(1.0 - rad / (1.0 + margin), 0.0, 0.5)[:, None]
            x = np.where(bad[:, None], x + frac * (mid - x), x)
        d = x[g.nxt] - x
        lens = np.linalg.norm(d, axis=1)
        if sub is None or sweep % refresh == 0:
            s, t, dist = segment_closest_points(x[g.pi], d[g.pi], x[g.pj], d[g.pj])
            sep = _arc_separation(g, lens, s, t)
            far = sep >= reach
            sub = np.flatnonzero(far & (dist < goal + 4.0 * lens.max()))
            s, t, dist = s[sub], t[sub], dist[sub]
        else:
            s, t, dist = segment_closest_points(x[g.pi[sub]], d[g.pi[sub]], x[g.pj[sub]], d[g.pj[sub]])
        hit = dist < 2.0
        if np.any(hit):
            pi, pj = g.pi[sub[hit]], g.pj[sub[hit]]
            s, t, dist = s[hit], t[hit], dist[hit]
            p = x[pi] + s[:, None] * d[pi]
            q = x[pj] + t[:, None] * d[pj]
            n = (q - p) / np.maximum(dist, 1e-300)[:, None]
            m = (0.5 * (goal - dist))[:, None] * n
            disp = np.zeros_like(x)
            cnt = np.zeros(len(x))
            for idx, w, sgn in ((pi, 1.0 - s, -1.0), (g.nxt[pi], s, -1.0),
                                (pj, 1.0 - t, 1.0), (g.nxt[pj], t, 1.0)):
                np.add.at(disp, idx, sgn * w[:, None] * m)
                np.add.at(cnt, idx, w)
            x = x + disp / np.maximum(cnt, 1.0)[:, None]
        if np.abs(x - before).max() < settle * lens.mean():
            break
    return x


def _min_nonadjacent_distance(g: _Geometry, x) -> float:
    d = x[g.nxt] - x
    _, _, dist = segment_closest_points(x[g.pi], d[g.pi], x[g.pj], d[g.pj])
    return float(dist.min())


def _measure(link: PolyLink) -> tuple[float, float]:
    tau = thickness_value(link)
    return tau, link.length() / tau if tau > 0 else math.inf


def check_step(state: MinimizerState, proposed, tolerance: float = 0.01,
               max_displacement: Optional[float] = None) -> StepDecision:
    """Accept iff thickness of ``proposed`` is at least ``target - tolerance``,
    ropelength does not increase, and no vertex moved far enough
    (``max_displacement``) to let two non-adjacent segments cross."""
    proposed = as_link(proposed)
    cur = state.current
    if [len(c) for c in proposed] != [len(c) for c in cur]:
        raise MinimizerError("proposal changes the vertex count")
    old_x = cur.all_vertices()
    new_x = proposed.all_vertices()
    if max_displacement is None:
        max_displacement = 0.5 * _min_nonadjacent_distance(_Geometry(cur), old_x)
    step = float(np.linalg.norm(new_x - old_x, axis=1).max()) if len(new_x) else 0.0
    tau, rl = _measure(proposed)
    old_rl = cur.length() / thickness_value(cur)
    if tau < state.target_thickness - tolerance:
        return StepDecision(False, "thickness violation", tau, rl)
    if step >= max_displacement:
        return StepDecision(False, "displacement could allow a crossing", tau, rl)
    if rl > old_rl * (1.0 + 1e-12):
        return StepDecision(False, "ropelength increased", tau, rl)
    return StepDecision(True, "ok", tau, rl)


def propose_step(state: MinimizerState, step: Optional[float] = None, sweeps: int = 40) -> PolyLink:
    """One shorten-then-project proposal from ``state.current``, with vertex
    motion capped below half the non-adjacent segment distance."""
    g = _Geometry(state.current)
    x = state.current.all_vertices()
    lap = 0.5 * (x[g.prv] + x[g.nxt]) - x
    y = _project(g, x + (state.step if step is None else step) * lap, sweeps)
    cap = 0.45 * _min_nonadjacent_distance(g, x)
    disp = np.linalg.norm(y - x, axis=1).max()
    if disp >= cap:
        y = x + (y - x) * (0.99 * cap / disp)
    return g.link(y)


def _normalize(x, tau):
    c = x.mean(axis=0)
    return c + (x - c) / tau


def minimize(start, params: Optional[MinimizerParams] = None,
             log_file: Optional[TextIO] = None,
             callback: Optional[Callable[[MinimizerState], None]] = None):
    """Shorten ``start`` at unit thickness.  Returns ``(link, state)``."""
    params = params or MinimizerParams()
    link = as_link(start)
    if params.vertices_per_component:
        link = resample_count(link, params.vertices_per_component)
    tau0 = thickness_value(link)
    if not tau0 > 0:
        raise MinimizerError("start link is not embedded (thickness 0)")
    g = _Geometry(link)
    x = _normalize(link.all_vertices(), tau0)
    rng = np.random.default_rng(params.seed)
    tau, rl = _measure(g.link(x))
    state = MinimizerState(g.link(x), 1.0, params.shrink_rate)
    state.history.append((0, rl, tau))
    _log(log_file, 0, g.link(x).length(), tau, rl)
    t_start = time.perf_counter()
    tol = params.overlap_tolerance

    while state.iteration < params.max_iter:
        state.iteration += 1
        it = state.iteration
        if params.time_limit and time.perf_counter() - t_start > params.time_limit:
            state.stop_reason = "time limit"
            break
        cap = 0.45 * _min_nonadjacent_distance(g, x)

        if params.equalize_every and it % params.equalize_every == 0:
            try:
                y = resample_count(g.link(x), g.sizes).all_vertices()
            except CurveError:
                y = None
            if y is not None:
                y = _project(g, y, params.projection_sweeps)
                ok, x, tau, rl = _try_accept(g, x, y, cap, tol, rl)
                if ok:
                    state.accepted += 1
                    state.history.append((it, rl, tau))
                    _log(log_file, it, rl * tau, tau, rl)
                continue

        lap = 0.5 * (x[g.prv] + x[g.nxt]) - x
        y = x + state.step * lap
        if params.noise:
            y = y + params.noise * state.step * rng.standard_normal(x.shape) * np.linalg.norm(lap, axis=1).mean()
        y = _project(g, y, params.projection_sweeps)
        ok, x_new, tau_new, rl_new = _try_accept(g, x, y, cap, tol, rl)
        if ok:
            x, tau, rl = x_new, tau_new, rl_new
            state.accepted += 1
            state.step = min(state.step * 1.2, 1.0)
            state.history.append((it, rl, tau))
            _log(log_file, it, rl * tau, tau, rl)
            if params.lower_bound is not None and rl < params.lower_bound - 1e-9:
                raise MinimizerError(f"ropelength {rl} fell below the lower bound {params.lower_bound}")
        else:
            state.step *= 0.5
            if state.step < params.min_step:
                state.stagnated = True
                state.stop_reason = "step size underflow"
                break
        if callback:
            state.current = g.link(x)
            callback(state)
        if _stagnant(state.history, it, params):
            state.stagnated = True
            state.stop_reason = "stagnation"
            break
    else:
        state.stop_reason = "max_iter"

    state.current = g.link(x)
    return state.current, state


def _try_accept(g, x, y, cap, tol, rl_old):
    disp = np.linalg.norm(y - x, axis=1).max()
    if disp >= cap:
        y = x + (y - x) * (0.99 * cap / disp)
    cand = g.link(y)
    try:
        tau, rl = _measure(cand)
    except CurveError:
        return False, x, math.nan, rl_old
    if tau < 1.0 - tol or not rl < rl_old:
        return False, x, tau, rl_old
    return True, _normalize(y, tau), tau, rl


def _stagnant(history, it, params) -> bool:
    w = params.stagnation_window
    if it < w or len(history) < 2:
        return False
    past = [h for h in history if h[0] <= it - w]
    if not past:
        return False
    before = past[-1][1]
    now = history[-1][1]
    return (before - now) < params.stagnation_rtol * before


def _log(fh, it, length, tau, rl):
    if fh is not None:
        fh.write(json.dumps({"iteration": it, "length": length, "thickness": tau, "ropelength": rl}) + "\n")
