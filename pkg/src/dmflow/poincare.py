"""First-return analysis of the diverge-merge network.

When the downstream link is the bottleneck (C3 <= C0 and C3 < C1 + C2),
exactly one intermediate link is congested in any nearby stationary state,
and kinematic waves circulate: backward on the congested link, forward on
the other.  Sampling the congested link's out-flux each time a disturbance
completes the loop gives a one-dimensional return map.  In the unified
variable v (link-1 out-flux; C3 minus link-2 out-flux when link 2 is the
congested one) the map is piecewise linear and nonincreasing:

    counterclockwise (link 1 congested):
        F(v) = min(C1, max(A1, C3 - ((1-xi)/xi) * v)),
        A1 = max(C3 - (1-xi)*C0, C3 - C2, beta*C3)

    clockwise (link 2 congested):
        F(v) = max(C3 - C2, min(A2p, (xi/(1-xi)) * (C3 - v))),
        A2p = min(xi*C0, C1, beta*C3)

Its unique fixed point carries the stationary flow.  Stability is read off
the interior slope: the fixed point is reached exactly after at most two
iterations when a clamp contains it; otherwise perturbations alternate
with ratio (1-xi)/xi (counterclockwise) or xi/(1-xi) (clockwise), giving
damped oscillation on one side of 1/2 and, on the other, a unique
attracting two-cycle (v-, v+) that bounds the flow oscillation amplitude.
At slope exactly one every off-fixed-point state is two-periodic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, UnsupportedRegimeError
from .network import DmSpec
from .piecewise import PiecewiseLinear

__all__ = [
    "Regime",
    "Circulation",
    "PoincareMap",
    "StabilityClass",
    "PeriodTwoPoints",
    "StabilityReport",
    "classify_regime",
    "build_map",
    "fixed_point",
    "classify_stability",
    "period2_points",
    "cobweb",
]


class Regime(Enum):
    """Which structural case the capacities and route split select."""

    UPSTREAM_BOTTLENECK = "upstream_bottleneck"    # C0 < min(C1+C2, C3)
    MIDDLE_BOTTLENECK = "middle_bottleneck"        # C1+C2 <= min(C0, C3)
    CCW_FINITE_TIME = "ccw_finite_time"            # counterclockwise, clamped
    CW_FINITE_TIME = "cw_finite_time"              # clockwise, clamped
    CCW_CW_OVERLAP = "ccw_cw_overlap"              # xi == beta in the open band
    SOC_SUC = "soc_suc"    # link 1 strictly over-, link 2 strictly under-critical
    SUC_SOC = "suc_soc"    # mirror image

    @property
    def supports_map(self) -> bool:
        return self not in (Regime.UPSTREAM_BOTTLENECK,
                            Regime.MIDDLE_BOTTLENECK)


class Circulation(Enum):
    COUNTERCLOCKWISE = "counterclockwise"
    CLOCKWISE = "clockwise"


class StabilityClass(Enum):
    FINITE_TIME = "finite_time"
    ASYMPTOTIC = "asymptotic"
    UNSTABLE = "unstable"
    NEUTRAL_TWO_CYCLE_CONTINUUM = "neutral_two_cycle_continuum"


@dataclass(frozen=True)
class PeriodTwoPoints:
    """Two-cycle bracketing the fixed point.

    With continuum=True (interior slope exactly one) every v in
    [v_minus, v*) u (v*, v_plus] is two-periodic, not just the endpoints.
    """

    v_minus: float
    v_plus: float
    continuum: bool = False


@dataclass(frozen=True)
class StabilityReport:
    regime: Regime
    stability: StabilityClass
    fixed_point: float | None
    max_steps: int | None = None       # finite-time convergence bound
    period2: PeriodTwoPoints | None = None
    lyapunov_verdict: str | None = None
    # Strict Lyapunov label where it differs from the class: the neutral
    # continuum never decays, so first-method analysis calls it unstable.


def classify_regime(spec: DmSpec) -> Regime:
    """Structural regime of the network at the given route split."""
    c0, c1, c2, c3 = spec.c0, spec.c1, spec.c2, spec.c3
    if c0 < min(c1 + c2, c3):
        return Regime.UPSTREAM_BOTTLENECK
    if c1 + c2 <= min(c0, c3):
        return Regime.MIDDLE_BOTTLENECK
    # Downstream bottleneck: c3 <= c0 and c3 < c1 + c2.
    xi, beta = spec.xi, spec.beta
    lo = (c3 - c2) / c3
    hi = c1 / c3
    if xi >= hi:
        return Regime.CCW_FINITE_TIME
    if xi <= lo:
        return Regime.CW_FINITE_TIME
    if xi == beta:
        return Regime.CCW_CW_OVERLAP
    if xi > beta:
        return Regime.CCW_FINITE_TIME if c3 == c0 else Regime.SOC_SUC
    return Regime.CW_FINITE_TIME if c3 == c0 else Regime.SUC_SOC


@dataclass(frozen=True)
class PoincareMap:
    """Unified return map: nonincreasing, piecewise linear on [0, C3]."""

    branch: Circulation
    slope: float      # (1-xi)/xi counterclockwise, xi/(1-xi) clockwise
    lower: float      # A1 counterclockwise, C3 - C2 clockwise
    upper: float      # C1 counterclockwise, A2p clockwise
    c3: float

    def __call__(self, v: float) -> float:
        if not 0.0 <= v <= self.c3:
            raise DomainError(f"v={v} outside [0, {self.c3}]")
        if self.branch is Circulation.COUNTERCLOCKWISE:
            return min(self.upper, max(self.lower, self.c3 - self.slope * v))
        return max(self.lower, min(self.upper, self.slope * (self.c3 - v)))

    def iterate(self, v0: float, n: int) -> list[float]:
        """Orbit [v0, F v0, ..., F^n v0]."""
        if n < 0:
            raise DomainError("n must be nonnegative")
        orbit = [v0]
        v = v0
        for _ in range(n):
            v = self(v)
            orbit.append(v)
        return orbit

    def as_piecewise(self) -> PiecewiseLinear:
        """Exact breakpoint representation on [0, C3].

        The interior kinks are the preimages of the two clamp levels; the
        map is affine between consecutive breakpoints.
        """
        cuts = {0.0, self.c3}
        if self.slope != 0.0:
            if self.branch is Circulation.COUNTERCLOCKWISE:
                candidates = ((self.c3 - self.upper) / self.slope,
                              (self.c3 - self.lower) / self.slope)
            else:
                candidates = (self.c3 - self.upper / self.slope,
                              self.c3 - self.lower / self.slope)
            cuts.update(x for x in candidates if 0.0 < x < self.c3)
        xs = tuple(sorted(cuts))
        return PiecewiseLinear(xs, tuple(self(x) for x in xs))


def _thresholds(spec: DmSpec) -> tuple[float, float]:
    return (spec.c3 - spec.c2) / spec.c3, spec.c1 / spec.c3


def _a1(spec: DmSpec) -> float:
    return max(spec.c3 - (1.0 - spec.xi) * spec.c0,
               spec.c3 - spec.c2,
               spec.beta * spec.c3)


def _a2p(spec: DmSpec) -> float:
    return min(spec.xi * spec.c0, spec.c1, spec.beta * spec.c3)


def _branch_for(spec: DmSpec, regime: Regime,
                prefer: Circulation | None) -> Circulation:
    if regime in (Regime.CCW_FINITE_TIME, Regime.SOC_SUC):
        return Circulation.COUNTERCLOCKWISE
    if regime in (Regime.CW_FINITE_TIME, Regime.SUC_SOC):
        return Circulation.CLOCKWISE
    # Overlap: both constructions share the fixed point xi*C3.  Default to
    # counterclockwise unless that slope degenerates (xi == 0).
    if prefer is not None:
        return prefer
    return (Circulation.CLOCKWISE if spec.xi == 0.0
            else Circulation.COUNTERCLOCKWISE)


def build_map(spec: DmSpec,
              branch: Circulation | None = None) -> PoincareMap:
    """Construct the return map for a downstream-bottleneck network.

    branch only matters in the overlap regime (xi == beta inside the open
    band), where either circulation direction yields a valid map.
    """
    regime = classify_regime(spec)
    if not regime.supports_map:
        raise UnsupportedRegimeError(
            f"no circulating return map in regime {regime.value}")
    chosen = _branch_for(spec, regime, branch)
    if chosen is Circulation.COUNTERCLOCKWISE:
        if spec.xi == 0.0:
            raise DomainError(
                "counterclockwise slope degenerates at xi = 0")
        return PoincareMap(chosen, (1.0 - spec.xi) / spec.xi,
                           _a1(spec), spec.c1, spec.c3)
    if spec.xi == 1.0:
        raise DomainError("clockwise slope degenerates at xi = 1")
    return PoincareMap(chosen, spec.xi / (1.0 - spec.xi),
                       spec.c3 - spec.c2, _a2p(spec), spec.c3)


def fixed_point(spec: DmSpec) -> float:
    """The unique fixed point of the return map.

    Equals xi*q (counterclockwise) or C3 - (1-xi)*q (clockwise) with q the
    stationary through-flow, which collapses to C1, C3 - C2, or xi*C3
    depending on where xi sits relative to the thresholds.
    """
    regime = classify_regime(spec)
    if not regime.supports_map:
        raise UnsupportedRegimeError(
            f"no return-map fixed point in regime {regime.value}")
    lo, hi = _thresholds(spec)
    if spec.xi >= hi:
        return spec.c1
    if spec.xi <= lo:
        return spec.c3 - spec.c2
    return spec.xi * spec.c3


def period2_points(spec: DmSpec) -> PeriodTwoPoints | None:
    """The two-cycle of an unstable or neutral map; None when stable.

    Counterclockwise (slope lam = (1-xi)/xi >= 1):
        v- = max(A1, C3 - lam*C1),  v+ = min(C1, C3 - lam*v-)
    Clockwise (slope mu = xi/(1-xi) >= 1), by the v -> C3 - v symmetry
    that swaps (xi, C1, beta) with (1-xi, C2, 1-beta):
        v- = max(C3 - C2, mu*(C3 - A2p)),  v+ = min(A2p, mu*(C3 - v-))
    v+ is evaluated as the image of v-, so the cycle closes bitwise under
    the map.
    """
    regime = classify_regime(spec)
    if regime not in (Regime.SOC_SUC, Regime.SUC_SOC):
        if not regime.supports_map:
            raise UnsupportedRegimeError(
                f"no return map in regime {regime.value}")
        return None
    fmap = build_map(spec)
    if fmap.slope < 1.0:
        return None
    if fmap.branch is Circulation.COUNTERCLOCKWISE:
        v_minus = max(fmap.lower, fmap.c3 - fmap.slope * fmap.upper)
    else:
        v_minus = max(fmap.lower, fmap.slope * (fmap.c3 - fmap.upper))
    v_plus = fmap(v_minus)
    return PeriodTwoPoints(v_minus, v_plus, continuum=(fmap.slope == 1.0))


def _finite_time_steps(spec: DmSpec) -> int:
    """1 when the map is constant, else 2 (the general clamp bound)."""
    fmap = build_map(spec)
    v_star = fixed_point(spec)
    return 1 if fmap(0.0) == v_star and fmap(spec.c3) == v_star else 2


def classify_stability(spec: DmSpec) -> StabilityReport:
    """Regime, fixed point, stability class and periodic points.

    Bottleneck regimes (upstream or middle) settle in finite time for any
    initial profile and carry no return map; they are reported finite-time
    with no fixed-point value.
    """
    regime = classify_regime(spec)
    if not regime.supports_map:
        return StabilityReport(regime, StabilityClass.FINITE_TIME, None)
    if regime in (Regime.CCW_FINITE_TIME, Regime.CW_FINITE_TIME,
                  Regime.CCW_CW_OVERLAP):
        return StabilityReport(regime, StabilityClass.FINITE_TIME,
                               fixed_point(spec),
                               max_steps=_finite_time_steps(spec))
    v_star = fixed_point(spec)
    slope = build_map(spec).slope
    if slope < 1.0:
        return StabilityReport(regime, StabilityClass.ASYMPTOTIC, v_star)
    cycle = period2_points(spec)
    if slope == 1.0:
        return StabilityReport(
            regime, StabilityClass.NEUTRAL_TWO_CYCLE_CONTINUUM, v_star,
            period2=cycle, lyapunov_verdict="unstable")
    return StabilityReport(regime, StabilityClass.UNSTABLE, v_star,
                           period2=cycle)


def cobweb(fmap: PoincareMap, v0: float, n: int,
           ) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Cobweb segments of an orbit, for plotting against the diagonal.

    Each iteration contributes the vertical segment (v_i, v_i)->(v_i,
    v_{i+1}) and the horizontal one (v_i, v_{i+1})->(v_{i+1}, v_{i+1}).
    """
    orbit = fmap.iterate(v0, n)
    segments = []
    for a, b in zip(orbit, orbit[1:]):
        segments.append(((a, a), (a, b)))
        segments.append(((a, b), (b, b)))
    return segments
