"""Curve files and JSON report documents.

A curve file is plain text::

    ROPEKIT-LINK v1
    <number of components>
    <vertex count of component 0>
    x y z
    ...

Coordinates are written with ``repr`` so that reading a file back reproduces
every float bit for bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .curve import CurveError, PolyLink, as_link

HEADER = "ROPEKIT-LINK v1"


class LinkFormatError(ValueError):
    """Malformed curve file."""


def format_link(link) -> str:
    link = as_link(link)
    out = [HEADER, str(len(link))]
    for comp in link:
        out.append(str(len(comp)))
        out.extend(" ".join(repr(float(c)) for c in v) for v in comp.vertices)
    return "\n".join(out) + "\n"


def _int_line(lines, pos, what):
    if pos >= len(lines):
        raise LinkFormatError(f"count mismatch: file ends before {what}")
    try:
        val = int(lines[pos])
    except ValueError:
        raise LinkFormatError(f"line {pos + 1}: expected {what}, got {lines[pos]!r}") from None
    if val < 0:
        raise LinkFormatError(f"line {pos + 1}: {what} must be nonnegative")
    return val


def parse_link(text: str) -> PolyLink:
    """Parse curve-file text, or a JSON report carrying a ``link`` field."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise LinkFormatError(f"invalid JSON document: {exc}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("link"), str):
            raise LinkFormatError("JSON document carries no embedded link")
        return parse_link(doc["link"])
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != HEADER:
        raise LinkFormatError(f"malformed header: expected {HEADER!r}")
    m = _int_line(lines, 1, "component count")
    if m == 0:
        raise LinkFormatError("a link needs at least one component")
    pos = 2
    comps = []
    for c in range(m):
        n = _int_line(lines, pos, f"vertex count of component {c}")
        pos += 1
        if pos + n > len(lines):
            raise LinkFormatError(
                f"count mismatch: component {c} declares {n} vertices, "
                f"{len(lines) - pos} lines remain"
            )
        rows = []
        for k in range(pos, pos + n):
            parts = lines[k].split()
            if len(parts) != 3:
                raise LinkFormatError(f"vertex line {lines[k]!r} must hold three numbers")
            try:
                xyz = [float(p) for p in parts]
            except ValueError:
                raise LinkFormatError(f"unparsable vertex line {lines[k]!r}") from None
            if not all(math.isfinite(v) for v in xyz):
                raise LinkFormatError(f"non-finite coordinate in {lines[k]!r}")
            rows.append(xyz)
        pos += n
        comps.append(np.array(rows, dtype=float).reshape(-1, 3))
    if pos != len(lines):
        raise LinkFormatError(f"count mismatch: {len(lines) - pos} trailing lines")
    try:
        return PolyLink(comps)
    except CurveError as exc:
        raise LinkFormatError(str(exc)) from None


def load_link(path) -> PolyLink:
    return parse_link(Path(path).read_text())


def save_link(link, path) -> None:
    Path(path).write_text(format_link(link))


# ---------------------------------------------------------------------------
# reports


def _plain(obj):
    """Convert numpy scalars and arrays so ``json`` can serialize them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        # JSON has no infinities; keep them readable rather than invalid
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


class ReportDocument:
    """Sectioned JSON report; sections are free-form dicts."""

    SECTIONS = ("geometry", "invariants", "cone", "bounds", "lattice", "minimizer", "generated", "unfold")

    def __init__(self, command: str, params: Optional[dict] = None, seed: Optional[int] = None):
        self.command = command
        self.sections: dict = {}
        self.provenance = {
            "tool": "ropekit",
            "version": __version__,
            "command": command,
            "parameters": dict(params or {}),
            "seed": seed,
        }
        self.link_text: Optional[str] = None

    def add(self, name: str, content: dict) -> "ReportDocument":
        self.sections[name] = content
        return self

    def attach_link(self, link) -> "ReportDocument":
        self.link_text = format_link(link)
        return self

    def as_dict(self) -> dict:
        d = dict(self.sections)
        d["provenance"] = self.provenance
        if self.link_text is not None:
            d["link"] = self.link_text
        return _plain(d)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


def error_document(exc: BaseException, command: Optional[str] = None) -> str:
    doc = {"error": {"type": type(exc).__name__, "message": str(exc), "command": command}}
    return json.dumps(doc, sort_keys=True) + "\n"
