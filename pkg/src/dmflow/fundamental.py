"""Fundamental diagrams and their demand/supply decomposition.

A fundamental diagram is a unimodal flow-density relation Q(k) that reaches
its capacity C at the critical density k_c and vanishes at k = 0 and at the
jam density k_j.  Every flux computation in the network model is built from
its sending/receiving decomposition (Lighthill & Whitham 1955; Daganzo 1994;
Lebacque 1996):

    demand(k) = Q(min(k_c, k))     nondecreasing, saturates at C
    supply(k) = Q(max(k_c, k))     nonincreasing, starts at C

A traffic state can equivalently be described by the pair (demand, supply):
the flow is min(d, s), the larger of the two equals the capacity, and the
density is recovered by inverting the appropriate branch of Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "FundamentalDiagram",
    "TriangularDiagram",
    "GreenshieldsDiagram",
    "TrafficState",
]


@dataclass(frozen=True)
class TrafficState:
    """A point in the demand-supply plane.

    One of the two components always equals the capacity of the owning
    link: demand for over-critical states, supply for under-critical ones.
    """

    demand: float
    supply: float

    def __post_init__(self):
        if self.demand < 0.0 or self.supply < 0.0:
            raise DomainError(f"demand/supply must be nonnegative, got {self}")

    @property
    def flow(self) -> float:
        return min(self.demand, self.supply)


class FundamentalDiagram:
    """Base class; concrete shapes implement flow() and the two inverses."""

    capacity: float
    critical_density: float
    jam_density: float
    free_flow_speed: float

    # Largest kinematic wave speed magnitude, used for CFL bounds.
    max_wave_speed: float

    def flow(self, k: float) -> float:
        raise NotImplementedError

    def _invert_under_critical(self, q: float) -> float:
        """Density k <= k_c with Q(k) = q."""
        raise NotImplementedError

    def _invert_over_critical(self, q: float) -> float:
        """Density k >= k_c with Q(k) = q."""
        raise NotImplementedError

    def _check_density(self, k: float) -> None:
        if not 0.0 <= k <= self.jam_density:
            raise DomainError(
                f"density {k} outside [0, {self.jam_density}]")

    def demand(self, k: float) -> float:
        """Sending flow Q(min(k_c, k))."""
        self._check_density(k)
        return self.flow(min(self.critical_density, k))

    def supply(self, k: float) -> float:
        """Receiving flow Q(max(k_c, k))."""
        self._check_density(k)
        return self.flow(max(self.critical_density, k))

    def state(self, k: float) -> TrafficState:
        return TrafficState(self.demand(k), self.supply(k))

    def state_to_density(self, u: TrafficState, rel_tol: float = 1e-9) -> float:
        """Recover the density of a demand-supply pair.

        Under-critical states (d <= s) sit on the rising branch with flow d;
        over-critical states on the falling branch with flow s.  The pair is
        only meaningful when max(d, s) equals the capacity.
        """
        top = max(u.demand, u.supply)
        if not math.isclose(top, self.capacity, rel_tol=rel_tol, abs_tol=1e-12):
            raise DomainError(
                f"inconsistent state {u}: max(d, s)={top} != capacity {self.capacity}")
        if u.demand <= u.supply:
            return self._invert_under_critical(u.demand)
        return self._invert_over_critical(u.supply)


@dataclass(frozen=True, init=False)
class TriangularDiagram(FundamentalDiagram):
    """Triangular flow-density relation.

    Q(k) = min(v_f * k, w * (k_j - k)); the two branches meet at the
    critical density k_c = C / v_f.  The cell-transmission scheme is exact
    for piecewise-constant profiles on this shape, which is why it is the
    default for simulation.
    """

    free_flow_speed: float
    congested_wave_speed: float
    jam_density: float
    capacity: float
    critical_density: float
    max_wave_speed: float

    def __init__(self, free_flow_speed: float, congested_wave_speed: float,
                 jam_density: float):
        if free_flow_speed <= 0 or congested_wave_speed <= 0 or jam_density <= 0:
            raise DomainError("triangular diagram parameters must be positive")
        vf, w, kj = free_flow_speed, congested_wave_speed, jam_density
        kc = kj * w / (vf + w)
        object.__setattr__(self, "free_flow_speed", vf)
        object.__setattr__(self, "congested_wave_speed", w)
        object.__setattr__(self, "jam_density", kj)
        object.__setattr__(self, "critical_density", kc)
        object.__setattr__(self, "capacity", vf * kc)
        object.__setattr__(self, "max_wave_speed", max(vf, w))

    @classmethod
    def from_capacity(cls, capacity: float, free_flow_speed: float = 1.0,
                      congested_wave_speed: float = 0.5) -> "TriangularDiagram":
        """Build from (C, v_f, w); the jam density k_j = C/v_f + C/w is derived.

        Sets capacity and critical density exactly from the arguments so
        that flux plateaus of a simulated stationary state reproduce C
        without rounding detours through k_j.
        """
        if capacity <= 0:
            raise DomainError("capacity must be positive")
        vf, w = free_flow_speed, congested_wave_speed
        kc = capacity / vf
        fd = cls.__new__(cls)
        object.__setattr__(fd, "free_flow_speed", vf)
        object.__setattr__(fd, "congested_wave_speed", w)
        object.__setattr__(fd, "jam_density", kc + capacity / w)
        object.__setattr__(fd, "critical_density", kc)
        object.__setattr__(fd, "capacity", capacity)
        object.__setattr__(fd, "max_wave_speed", max(vf, w))
        return fd

    def flow(self, k: float) -> float:
        return min(self.free_flow_speed * k,
                   self.congested_wave_speed * (self.jam_density - k))

    def demand(self, k: float) -> float:
        self._check_density(k)
        return min(self.free_flow_speed * k, self.capacity)

    def supply(self, k: float) -> float:
        self._check_density(k)
        return min(self.capacity,
                   self.congested_wave_speed * (self.jam_density - k))

    def _invert_under_critical(self, q: float) -> float:
        return q / self.free_flow_speed

    def _invert_over_critical(self, q: float) -> float:
        return self.jam_density - q / self.congested_wave_speed


@dataclass(frozen=True, init=False)
class GreenshieldsDiagram(FundamentalDiagram):
    """Parabolic flow-density relation Q(k) = v_f * k * (1 - k/k_j)."""

    free_flow_speed: float
    jam_density: float
    capacity: float
    critical_density: float
    max_wave_speed: float

    def __init__(self, free_flow_speed: float, jam_density: float):
        if free_flow_speed <= 0 or jam_density <= 0:
            raise DomainError("greenshields parameters must be positive")
        object.__setattr__(self, "free_flow_speed", free_flow_speed)
        object.__setattr__(self, "jam_density", jam_density)
        object.__setattr__(self, "critical_density", jam_density / 2.0)
        object.__setattr__(self, "capacity",
                           free_flow_speed * jam_density / 4.0)
        # |Q'(k)| is maximal at the jam end, where it equals v_f.
        object.__setattr__(self, "max_wave_speed", free_flow_speed)

    @classmethod
    def from_capacity(cls, capacity: float,
                      free_flow_speed: float = 1.0) -> "GreenshieldsDiagram":
        if capacity <= 0:
            raise DomainError("capacity must be positive")
        return cls(free_flow_speed, 4.0 * capacity / free_flow_speed)

    def flow(self, k: float) -> float:
        return self.free_flow_speed * k * (1.0 - k / self.jam_density)

    def _invert_under_critical(self, q: float) -> float:
        r = max(0.0, 1.0 - q / self.capacity)
        return self.critical_density * (1.0 - math.sqrt(r))

    def _invert_over_critical(self, q: float) -> float:
        r = max(0.0, 1.0 - q / self.capacity)
        return self.critical_density * (1.0 + math.sqrt(r))
