"""Thick space curves: thickness, ropelength, invariants, cones and bounds."""

__version__ = "0.1.0"

from .curve import Component, CurveError, PolyLink, as_link  # noqa: E402

__all__ = ["Component", "CurveError", "PolyLink", "as_link", "__version__"]
