"""Command-line front end.  Every subcommand prints one JSON report."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as _bounds
from . import cones, generators, invariants, lattice, minimizer, thickness
from .curve import PolyLink
from .io import ReportDocument, error_document, parse_link


class UsageError(ValueError):
    pass


def _read_link(args) -> PolyLink:
    src = getattr(args, "input", None)
    if src in (None, "-"):
        if sys.stdin is None or sys.stdin.isatty():
            raise UsageError("no input curve: pass a file or pipe one on stdin")
        text = sys.stdin.read()
    else:
        text = Path(src).read_text()
    if not text.strip():
        raise UsageError("empty input")
    return parse_link(text)


def _optional_link(args):
    """Link from the positional input or piped stdin, or None when neither."""
    if getattr(args, "input", None) not in (None, "-"):
        return _read_link(args)
    if sys.stdin is None or sys.stdin.isatty():
        return None
    text = sys.stdin.read()
    return parse_link(text) if text.strip() else None


def _geometry(link) -> dict:
    return thickness.thickness(link).as_dict()


def _params(args, skip=("func", "input", "out")) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _component(link, i) -> int:
    if not 0 <= i < len(link):
        raise UsageError(f"component {i} out of range for a {len(link)}-component link")
    return i


# ---------------------------------------------------------------------------
# subcommands


def cmd_thickness(args):
    link = _read_link(args)
    doc = ReportDocument("thickness", _params(args), args.seed)
    geo = _geometry(link)
    if args.bruteforce:
        geo["thickness_bruteforce"] = thickness.thickness_bruteforce(link)
    return doc.add("geometry", geo)


def cmd_invariants(args):
    link = _read_link(args)
    record = json.loads(Path(args.record).read_text()) if args.record else {}
    inv = invariants.compute_invariants(
        link, supplied=record.get("components"), crossing_number=record.get("crossing_number")
    )
    body = inv.as_dict()
    try:
        body["determinant"] = invariants.curve_determinant(link, seed=args.seed)
    except invariants.DegenerateProjectionError:
        body["determinant"] = None
    return ReportDocument("invariants", _params(args), args.seed).add("invariants", body)


def _parse_point(text):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"--at expects x,y,z, got {text!r}") from None
    if len(vals) != 3 or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"--at expects three finite numbers, got {text!r}")
    return np.array(vals)


def cmd_cone(args):
    link = _read_link(args)
    i = _component(link, args.component)
    tau = thickness.thickness_value(link)
    comp = link[i]
    if args.at is not None:
        apex = _parse_point(args.at)
        ang = cones.cone_angle(comp, apex)
        dist = float(thickness.point_curve_distance(apex, link)[0])
        rep = cones.ConeReport(apex, ang, dist, dist >= tau, tau, 1)
        mode = "at"
    elif args.max:
        rep = cones.max_cone_angle_search(comp, tau=tau, budget=args.budget)
        mode = "max"
    else:
        rep = cones.find_flat_cone_point(comp, tau=tau)
        mode = "flat"
    body = rep.as_dict()
    body.update(mode=mode, component=i)
    return ReportDocument("cone", _params(args), args.seed).add("cone", body)


def cmd_unfold(args):
    link = _read_link(args)
    i = _component(link, args.component)
    tau = thickness.thickness_value(link)
    dev = cones.unfold(link[i], tau=tau)
    src_len = link[i].length()
    dev_len = float(dev.edge_lengths().sum())
    body = {
        "component": i,
        "apex": dev.apex,
        "cone_angle": dev.apex_angle_total,
        "source_length": src_len,
        "developed_length": dev_len,
        "length_relative_error": abs(dev_len - src_len) / src_len,
        "chord_expansion_defect": cones.chord_expansion_defect(link[i], dev, args.samples, args.seed),
        "chord_samples": args.samples,
    }
    plane = np.c_[dev.vertices, np.zeros(len(dev.vertices))]
    doc = ReportDocument("unfold", _params(args), args.seed).add("unfold", body)
    return doc.attach_link(PolyLink([plane]))


def cmd_bounds(args):
    record = json.loads(Path(args.invariants).read_text())
    link = _optional_link(args)
    inv = invariants.invariants_from_record(record, link=link)
    rep = _bounds.best_bound(inv)
    doc = ReportDocument("bounds", _params(args), args.seed)
    doc.add("bounds", rep.as_dict())
    doc.add("invariants", inv.as_dict())
    if link is not None:
        geo = _geometry(link)
        geo["bound_respected"] = geo["ropelength"] >= rep.best_bound
        doc.add("geometry", geo)
    return doc


def cmd_generate(args):
    kind = args.kind
    v = args.vertices
    if kind == "chain":
        cfg = generators.simple_chain(args.k, v)
    elif kind == "peri":
        cfg = generators.peri_link(args.n, v)
    elif kind == "borromean":
        cfg = generators.borromean_rings(v)
    elif kind == "torus24":
        cfg = generators.torus_link_2_4(v)
    elif kind == "trefoil":
        link = generators.trefoil_symmetric(v)
        cfg = generators.GeneratedConfig(link, math.nan, 1.0, "trefoil:symmetric parametrization")
    else:
        link = generators.rolled_circle(v)
        cfg = generators.GeneratedConfig(link, 2 * math.pi, 1.0, "circle:unit")
    doc = ReportDocument("generate", _params(args), args.seed)
    doc.add("generated", {
        "kind": kind,
        "claimed_ropelength": None if math.isnan(cfg.claimed_ropelength) else cfg.claimed_ropelength,
        "claimed_thickness": cfg.claimed_thickness,
        "source": cfg.provenance,
        "params": cfg.params,
    })
    if args.measure:
        doc.add("geometry", _geometry(cfg.link))
    return doc.attach_link(cfg.link)


def cmd_minimize(args):
    link = _read_link(args)
    params = minimizer.MinimizerParams(
        max_iter=args.max_iter,
        seed=args.seed,
        vertices_per_component=args.vertices,
        time_limit=args.time_limit,
        lower_bound=args.lower_bound,
    )
    log = open(args.log, "w") if args.log else None
    try:
        out, state = minimizer.minimize(link, params, log_file=log)
    finally:
        if log:
            log.close()
    hist = state.history
    doc = ReportDocument("minimize", _params(args), args.seed)
    doc.add("minimizer", {
        "initial_ropelength": hist[0][1],
        "final_ropelength": hist[-1][1],
        "iterations": state.iteration,
        "accepted": state.accepted,
        "stop_reason": state.stop_reason,
    })
    doc.add("geometry", _geometry(out))
    return doc.attach_link(out)


def cmd_lattice(args):
    d = lattice.parse_pd(Path(args.pd).read_text())
    lat = lattice.embed_lattice(d)
    rep = lattice.verify_lattice(lat, n=d.n)
    smooth, cert = lattice.smooth_corners(lat)
    geo = _geometry(smooth)
    lower = _bounds.bound_crossing_asymptotic(d.n)
    body = {
        "crossings": d.n,
        "components": d.num_components,
        "determinant": d.determinant(),
        "verification": rep.as_dict(),
        "all_checks": rep.all_ok,
        "certificate": cert,
        "sandwich": {
            "lower": lower,
            "measured": geo["ropelength"],
            "upper_2k": cert["ropelength_bound"],
            "upper_24n2": cert["quadratic_bound"],
            "holds": lower <= geo["ropelength"] <= cert["ropelength_bound"] <= cert["quadratic_bound"],
        },
    }
    doc = ReportDocument("lattice", _params(args), args.seed)
    doc.add("lattice", body).add("geometry", geo)
    return doc.attach_link(smooth)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ropekit", description="Thick space curve toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, takes_input=True, help=None):
        sp = sub.add_parser(name, help=help)
        if takes_input:
            sp.add_argument("input", nargs="?", default="-", help="curve file or report (default: stdin)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("thickness", cmd_thickness, help="thickness and ropelength")
    sp.add_argument("--bruteforce", action="store_true", help="also run the slow reference computation")

    sp = add("invariants", cmd_invariants, help="linking numbers, writhe, curvature")
    sp.add_argument("--record", help="JSON invariant record to merge")

    sp = add("cone", cmd_cone, help="cone points of one component")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--flat", action="store_true", help="apex with angle 2pi (default)")
    mode.add_argument("--max", action="store_true", help="search for the largest angle")
    mode.add_argument("--at", metavar="X,Y,Z", help="angle at a given apex")
    sp.add_argument("--component", type=int, default=0)
    sp.add_argument("--budget", type=int, default=4000)

    sp = add("unfold", cmd_unfold, help="develop one component onto the plane")
    sp.add_argument("--component", type=int, default=0)
    sp.add_argument("--samples", type=int, default=10_000)

    sp = add("bounds", cmd_bounds, help="ropelength lower bounds")
    sp.add_argument("--invariants", required=True, help="JSON invariant record")

    sp = add("generate", cmd_generate, takes_input=False, help="build a reference configuration")
    sp.add_argument("kind", choices=["chain", "peri", "borromean", "torus24", "trefoil", "circle"])
    sp.add_argument("--k", type=int, default=2, help="chain length")
    sp.add_argument("--n", type=int, default=1, help="peri puncture count")
    sp.add_argument("--vertices", type=int, default=512, help="vertices per component")
    sp.add_argument("--measure", action="store_true", help="include measured geometry")

    sp = add("minimize", cmd_minimize, help="shorten at unit thickness")
    sp.add_argument("--max-iter", type=int, default=20_000)
    sp.add_argument("--vertices", type=int, default=None, help="resample to this many per component")
    sp.add_argument("--time-limit", type=float, default=None, help="seconds")
    sp.add_argument("--lower-bound", type=float, default=None, help="abort if the ropelength drops below")
    sp.add_argument("--log", help="JSON-lines progress log")

    sp = add("lattice", cmd_lattice, takes_input=False, help="cubic lattice embedding of a PD code")
    sp.add_argument("--pd", required=True, help="file holding X[a,b,c,d] tuples")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            if args.kind == "chain" and args.k < 2:
                raise UsageError("--k must be at least 2")
            if args.kind == "peri" and not 1 <= args.n <= 4:
                raise UsageError("--n must lie in 1..4")
        doc = args.func(args)
        text = doc.to_json()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    except Exception as exc:  # noqa: BLE001
        sys.stdout.write(error_document(exc, args.command))
        return 1


if __name__ == "__main__":
    sys.exit(main())
