"""Ropelength lower bounds for unit-thickness links from link invariants.

Every bound is a lower bound on the length of one component at unit thickness
(hence on that component's share of the ropelength), except the crossing-number
bound which applies to the whole link.  Each formula carries a string id that
is written into reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


class UnsupportedValueError(ValueError):
    """The requested value is not known exactly."""


def peri(n: int, allow_proxy: bool = False) -> float:
    """Shortest plane curve enclosing ``n`` disjoint unit disks.

    Exact for 1 <= n <= 6.  For n >= 7 the value is an open problem; with
    ``allow_proxy`` the isoperimetric lower proxy ``2*pi*sqrt(n)`` is returned.
    """
    n = int(n)
    if n < 1:
        raise ValueError("Peri(n) needs n >= 1")
    if n == 1:
        return TWO_PI
    if n <= 5:
        return TWO_PI + 2.0 * n
    if n == 6:
        return TWO_PI + 2.0 * (4.0 + math.sqrt(3.0))
    if allow_proxy:
        return TWO_PI * math.sqrt(n)
    raise UnsupportedValueError(
        f"Peri({n}) is not known exactly for n >= 7 (open perimeter problem)"
    )


def bound_peribound(n_linked: int, allow_proxy: bool = False) -> float:
    """Component linked to ``n_linked`` disjoint sublinks: 2*pi + Peri(n)."""
    if n_linked <= 0:
        return 0.0
    return TWO_PI + peri(n_linked, allow_proxy)


def bound_linking(total_lk: int) -> float:
    """Total linking number with the other components: 2*pi + 2*pi*sqrt(Lk)."""
    total_lk = abs(int(total_lk))
    if total_lk == 0:
        return 0.0
    return TWO_PI + TWO_PI * math.sqrt(total_lk)


def bound_pov(pov: int, nontrivial: bool) -> float:
    """Nontrivial knot with parallel overcrossing number ``pov``."""
    if not nontrivial:
        return 0.0
    if pov < 2:
        raise ValueError("a nontrivial knot has pov >= 2")
    return FOUR_PI + TWO_PI * math.sqrt(pov)


def bound_ac(ac: float, knotted: bool) -> float:
    """Asymptotic crossing number of a component relative to its link."""
    if ac < 0:
        raise ValueError("ac must be nonnegative")
    if knotted:
        return FOUR_PI + TWO_PI * math.sqrt(ac)
    if ac == 0:
        return 0.0
    return TWO_PI + TWO_PI * math.sqrt(ac)


def bound_genus(genus: int, knotted: bool = True) -> float:
    """2*pi*(2 + sqrt(2g - 1)) for a nontrivial knot; 0 for genus 0."""
    if genus < 0:
        raise ValueError("genus must be nonnegative")
    if genus == 0 or not knotted:
        return 0.0
    return TWO_PI * (2.0 + math.sqrt(2.0 * genus - 1.0))


def bound_chi(chi_minus: int) -> float:
    """Minimal Thurston norm of a spanning surface avoiding the rest of the link."""
    if chi_minus < 0:
        raise ValueError("chi_minus must be nonnegative")
    if chi_minus == 0:
        return 0.0
    return TWO_PI * (1.0 + math.sqrt(chi_minus))


def bound_writhe(wr: float, variant: str = "cone") -> float:
    """``cone``: 2*pi*sqrt|Wr|; ``buck_simon``: 4*pi*sqrt|Wr|."""
    if variant == "cone":
        return TWO_PI * math.sqrt(abs(wr))
    if variant == "buck_simon":
        return FOUR_PI * math.sqrt(abs(wr))
    raise ValueError(f"unknown writhe bound variant {variant!r}")


def bound_crossing_asymptotic(n: int) -> float:
    """Whole-link bound (4*pi*n/11)^(3/4) from the crossing number."""
    if n < 0:
        raise ValueError("crossing number must be nonnegative")
    return (FOUR_PI * n / 11.0) ** 0.75


def lattice_upper_bound(n: int) -> float:
    """Constructive ropelength upper bound 24 n^2 for an n-crossing diagram."""
    return 24.0 * n * n


FORMULAS = {
    "peribound": ("2pi + Peri(n)", lambda inp: bound_peribound(inp["n_linked"], inp.get("allow_proxy", False))),
    "linking": ("2pi + 2pi sqrt(Lk)", lambda inp: bound_linking(inp["total_lk"])),
    "pov": ("4pi + 2pi sqrt(pov)", lambda inp: bound_pov(inp["pov"], inp["nontrivial"])),
    "ac": ("(2|4)pi + 2pi sqrt(ac)", lambda inp: bound_ac(inp["ac"], inp["knotted"])),
    "genus": ("2pi (2 + sqrt(2g - 1))", lambda inp: bound_genus(inp["genus"], inp.get("knotted", True))),
    "chi": ("2pi (1 + sqrt(chi_-))", lambda inp: bound_chi(inp["chi_minus"])),
    "writhe_cone": ("2pi sqrt|Wr|", lambda inp: bound_writhe(inp["wr"], "cone")),
    "writhe_buck_simon": ("4pi sqrt|Wr|", lambda inp: bound_writhe(inp["wr"], "buck_simon")),
    "crossing_asymptotic": ("(4pi n / 11)^(3/4)", lambda inp: bound_crossing_asymptotic(inp["n"])),
}


def evaluate(formula: str, inputs: dict) -> float:
    return FORMULAS[formula][1](inputs)


@dataclass
class BoundEntry:
    component: Optional[int]
    formula: str
    value: float
    inputs: dict

    def as_dict(self):
        return {
            "component": self.component,
            "formula": self.formula,
            "expression": FORMULAS[self.formula][0],
            "value": self.value,
            "inputs": self.inputs,
        }


@dataclass
class BoundReport:
    entries: list = field(default_factory=list)
    best_per_component: list = field(default_factory=list)
    link_entries: list = field(default_factory=list)

    @property
    def total_lower_bound(self) -> float:
        return sum(e.value for e in self.best_per_component)

    @property
    def link_level_bound(self) -> float:
        return max((e.value for e in self.link_entries), default=0.0)

    @property
    def best_bound(self) -> float:
        """Strongest certified total: component sum or whole-link bound."""
        return max(self.total_lower_bound, self.link_level_bound)

    def as_dict(self):
        return {
            "per_formula": [e.as_dict() for e in self.entries],
            "best_per_component": [e.as_dict() for e in self.best_per_component],
            "link_level": [e.as_dict() for e in self.link_entries],
            "total_lower_bound": self.total_lower_bound,
            "best": self.best_bound,
        }


def best_bound(inv) -> BoundReport:
    """All applicable bounds per component, the best of each, and the total.

    ``inv`` is a :class:`ropekit.invariants.LinkInvariants`.  Formulas whose
    inputs were not supplied are skipped.
    """
    inv.validate()
    report = BoundReport()
    for i in range(inv.num_components):
        sup = inv.component_supplied(i)
        cands = []
        knotted = bool(sup.get("nontrivial_knot", False))
        lk_total = inv.total_linking(i)
        if lk_total is not None:
            cands.append(("linking", {"total_lk": int(lk_total)}))
        if sup.get("linked_partition_count") is not None:
            cands.append(("peribound", {"n_linked": int(sup["linked_partition_count"]),
                                        "allow_proxy": bool(sup.get("allow_peri_proxy", False))}))
        pov_lower = inv.pov_lower(i)
        if knotted and pov_lower is not None:
            cands.append(("pov", {"pov": pov_lower, "nontrivial": True}))
        if sup.get("ac") is not None:
            cands.append(("ac", {"ac": float(sup["ac"]), "knotted": knotted}))
        if sup.get("genus") is not None:
            cands.append(("genus", {"genus": int(sup["genus"]), "knotted": knotted}))
        if sup.get("thurston_norm") is not None:
            cands.append(("chi", {"chi_minus": int(sup["thurston_norm"])}))
        # writhe belongs to one configuration, so it must be supplied explicitly
        wr = sup.get("writhe")
        if wr is not None:
            cands.append(("writhe_cone", {"wr": float(wr)}))
            cands.append(("writhe_buck_simon", {"wr": float(wr)}))
        entries = [BoundEntry(i, f, evaluate(f, inp), inp) for f, inp in cands]
        report.entries.extend(entries)
        if entries:
            best = max(entries, key=lambda e: e.value)
        else:
            best = BoundEntry(i, "linking", 0.0, {"total_lk": 0})
        report.best_per_component.append(best)
    if inv.crossing_number is not None:
        inp = {"n": int(inv.crossing_number)}
        report.link_entries.append(BoundEntry(None, "crossing_asymptotic", evaluate("crossing_asymptotic", inp), inp))
    return report
