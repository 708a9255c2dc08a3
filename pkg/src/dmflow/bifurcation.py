"""Route-split sweeps: how stability changes with the choice proportion.

Varying xi moves the fixed point along a continuous piecewise-linear curve
while its character switches at four thresholds: 1 - C2/C3 and C1/C3 (ends
of the open band), beta (circulation direction flips) and 1/2 (interior
slope crosses one).  Sweeping a grid of xi values and recording the fixed
point, its class, and the two-cycle endpoints yields the data behind a
bifurcation diagram: a stable branch that loses stability on an interval
where a finite-amplitude two-cycle takes over.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError
from .network import DmSpec
from .poincare import (Regime, StabilityClass, classify_regime,
                       classify_stability)

__all__ = ["BifurcationPoint", "Transition", "sweep_xi", "regime_boundaries",
           "boundary_values"]

_DEDUPE_TOL = 1e-15


@dataclass(frozen=True)
class BifurcationPoint:
    xi: float
    v_star: float | None
    stability: StabilityClass
    v_minus: float | None
    v_plus: float | None


@dataclass(frozen=True)
class Transition:
    """Stability classes just below, at, and just above a boundary xi."""

    xi: float
    below: StabilityClass | None
    at: StabilityClass
    above: StabilityClass | None

    def describe(self) -> str:
        left = self.below.value if self.below else "-"
        right = self.above.value if self.above else "-"
        return f"{left} -> [{self.at.value}] -> {right}"


def boundary_values(template: DmSpec) -> list[float]:
    """Candidate transition points within [0, 1], sorted and deduplicated."""
    cands = [(template.c3 - template.c2) / template.c3,
             template.c1 / template.c3,
             template.beta,
             0.5]
    vals: list[float] = []
    for x in sorted(c for c in cands if 0.0 <= c <= 1.0):
        if not vals or x - vals[-1] > _DEDUPE_TOL:
            vals.append(x)
    return vals


def sweep_xi(template: DmSpec, grid: Iterable[float]) -> list[BifurcationPoint]:
    """Classify every xi on the grid, with boundary values always included.

    The grid is merged with the in-range boundary values, sorted ascending
    and deduplicated, so regime changes land on exact grid points.
    """
    xs = sorted(grid)
    if any(not 0.0 <= x <= 1.0 for x in xs):
        raise DomainError("grid values must lie in [0, 1]")
    if xs:
        lo, hi = xs[0], xs[-1]
        xs.extend(b for b in boundary_values(template) if lo <= b <= hi)
        xs.sort()
    merged: list[float] = []
    for x in xs:
        if not merged or x - merged[-1] > _DEDUPE_TOL:
            merged.append(x)
    points = []
    for xi in merged:
        report = classify_stability(template.with_xi(xi))
        p2 = report.period2
        points.append(BifurcationPoint(
            xi, report.fixed_point, report.stability,
            p2.v_minus if p2 else None, p2.v_plus if p2 else None))
    return points


def regime_boundaries(template: DmSpec) -> list[Transition]:
    """The exact boundary xi values with the class transition at each.

    Classes on either side are evaluated at the midpoints of the adjacent
    open intervals, which is exact because the class is constant between
    boundaries.  Bottleneck-regime templates have no transitions.
    """
    probe = classify_regime(template.with_xi(0.5))
    if probe in (Regime.UPSTREAM_BOTTLENECK, Regime.MIDDLE_BOTTLENECK):
        return []
    bounds = boundary_values(template)
    edges = [0.0] + bounds + [1.0]
    transitions = []
    for i, b in enumerate(bounds):
        lo_mid = (edges[i] + b) / 2.0
        hi_mid = (b + edges[i + 2]) / 2.0
        below = (classify_stability(template.with_xi(lo_mid)).stability
                 if b > 0.0 else None)
        above = (classify_stability(template.with_xi(hi_mid)).stability
                 if b < 1.0 else None)
        at = classify_stability(template.with_xi(b)).stability
        transitions.append(Transition(b, below, at, above))
    return transitions
