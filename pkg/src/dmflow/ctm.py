"""Cell-transmission (Godunov) simulation of the network kinematic-wave model.

Each link is split into uniform cells holding a total density and a
commodity-1 density.  All fluxes for a step are computed from the pre-step
state with the standard sending/receiving rule

    q = min(demand(upstream cell), supply(downstream cell)),

commodity flux upwinded as the upstream fraction times q.  Junctions use:

  * FIFO diverge:  q0 = min(d0, s1/xi, s2/(1-xi)), branch fluxes xi*q0 and
    (1-xi)*q0; a vanishing branch (xi in {0, 1}) drops its ratio
    constraint, matching the limit of the formula.
  * Priority merge: approach 1 gets min(d1, max(s3 - d2, beta*s3)),
    approach 2 the mirror image with share 1-beta; together they fill
    min(d1+d2, s3), so no downstream supply is wasted when saturated.

Origins are unqueued demand boundaries, destinations pure supply
boundaries.  Densities then advance by dt/dx times the flux imbalance.
The smallest cell traversal time over all links bounds dt (CFL); with the
default triangular diagram the scheme transports piecewise-constant
profiles exactly, so stationary states are discrete fixed points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .fundamental import (FundamentalDiagram, GreenshieldsDiagram,
                          TrafficState, TriangularDiagram)
from .network import (DMN_DEST_SUPPLY, Approach, Branch, DmSpec, LinkProfile,
                      Network, StationaryState, stationary_profile)

logger = logging.getLogger(__name__)

__all__ = [
    "SimConfig",
    "CellState",
    "LinkState",
    "NetworkState",
    "RunRecord",
    "Simulation",
    "link_flux",
    "diverge_flux",
    "merge_flux",
    "initialize_dm_stationary",
    "initialize_dmn_stationary",
    "initialize_beltway_congested",
]

CFL_SAFETY = 0.9


@dataclass(frozen=True)
class SimConfig:
    """Discretization settings; dt=None picks the CFL-safe default."""

    cells_per_link: int = 20
    dt: float | None = None
    horizon: float = 400.0
    free_flow_speed: float = 1.0
    congested_wave_speed: float = 0.5
    shape: str = "triangular"

    def __post_init__(self):
        if self.cells_per_link < 1:
            raise ConfigurationError("cells_per_link must be positive")
        if self.horizon < 0:
            raise ConfigurationError("horizon must be nonnegative")
        if self.dt is not None and self.dt <= 0:
            raise ConfigurationError("dt must be positive")


@dataclass(frozen=True)
class CellState:
    """Density and commodity-1 share of one cell."""

    density: float
    fraction: float


def link_flux(fd_up: FundamentalDiagram, up: CellState,
              fd_down: FundamentalDiagram, down: CellState,
              ) -> tuple[float, float]:
    """Total and commodity-1 flux between two adjacent cells."""
    q = min(fd_up.demand(up.density), fd_down.supply(down.density))
    return q, up.fraction * q


def diverge_flux(d0: float, s1: float, s2: float, xi: float,
                 ) -> tuple[float, float, float]:
    """FIFO diverge fluxes (q0, q1, q2) with branch-1 proportion xi."""
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"xi must lie in [0, 1], got {xi}")
    q0 = d0
    if xi > 0.0:
        q0 = min(q0, s1 / xi)
    if xi < 1.0:
        q0 = min(q0, s2 / (1.0 - xi))
    return q0, xi * q0, (1.0 - xi) * q0


def merge_flux(d1: float, d2: float, s3: float, beta: float,
               ) -> tuple[float, float, float]:
    """Priority merge fluxes (q3, q1, q2); approach 1 holds share beta."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    q1 = min(d1, max(s3 - d2, beta * s3))
    q2 = min(d2, max(s3 - d1, (1.0 - beta) * s3))
    return min(d1 + d2, s3), q1, q2


class LinkState:
    """Mutable per-link cell arrays."""

    def __init__(self, name: str, fd: FundamentalDiagram, length: float,
                 n_cells: int, inflow_fraction: float = 0.0):
        self.name = name
        self.fd = fd
        self.length = length
        self.n = n_cells
        self.dx = length / n_cells
        self.k = np.zeros(n_cells)
        self.k1 = np.zeros(n_cells)
        # Fraction assigned to empty cells; refreshed from actual inflow.
        self.inflow_fraction = inflow_fraction

    def fractions(self) -> np.ndarray:
        return np.where(self.k > 0.0,
                        np.divide(self.k1, self.k,
                                  out=np.zeros_like(self.k1),
                                  where=self.k > 0.0),
                        self.inflow_fraction)

    def set_uniform(self, density: float, fraction: float) -> None:
        self.k.fill(density)
        self.k1[:] = fraction * self.k
        self.inflow_fraction = fraction

    def set_cells(self, densities: np.ndarray, fraction: float) -> None:
        if len(densities) != self.n:
            raise ConfigurationError(
                f"{self.name}: expected {self.n} densities")
        self.k[:] = densities
        self.k1[:] = fraction * self.k
        self.inflow_fraction = fraction

    def vehicles(self) -> tuple[float, float]:
        return float(self.k.sum() * self.dx), float(self.k1.sum() * self.dx)


@dataclass
class NetworkState:
    """Snapshot of all link cells plus the clock."""

    t: float
    links: dict[str, tuple[np.ndarray, np.ndarray]]  # name -> (k, k1)

    def copy(self) -> "NetworkState":
        return NetworkState(self.t, {n: (k.copy(), k1.copy())
                                     for n, (k, k1) in self.links.items()})


@dataclass
class RunRecord:
    """Time series of boundary fluxes and bookkeeping of one run."""

    dt: float
    times: np.ndarray                      # time after each step
    outflux: dict[str, np.ndarray]         # per link, downstream boundary
    influx: dict[str, np.ndarray]          # per link, upstream boundary
    vehicles: np.ndarray                   # network total after each step
    vehicles_c1: np.ndarray
    boundary_in: np.ndarray                # total source flux each step
    boundary_out: np.ndarray
    conservation_error: float              # max |dN - (in-out)*dt| over steps
    conservation_error_c1: float
    final_state: NetworkState

    def series(self, link: str) -> tuple[np.ndarray, np.ndarray]:
        return self.times, self.outflux[link]


class Simulation:
    """Steppable CTM instance for one network description."""

    def __init__(self, network: Network, config: SimConfig = SimConfig()):
        network.validate()
        self.network = network
        self.config = config
        self.links: dict[str, LinkState] = {}
        for ln in network.links:
            fd = self._diagram(ln.capacity)
            self.links[ln.name] = LinkState(ln.name, fd, ln.length,
                                            config.cells_per_link)
        for origin in network.origins:
            self.links[origin.link].inflow_fraction = origin.fraction
        self.t = 0.0
        self.dt = self._resolve_dt()
        logger.debug("simulation ready: %d links, dt=%g",
                     len(self.links), self.dt)

    def _diagram(self, capacity: float) -> FundamentalDiagram:
        cfg = self.config
        if cfg.shape == "triangular":
            return TriangularDiagram.from_capacity(
                capacity, cfg.free_flow_speed, cfg.congested_wave_speed)
        if cfg.shape == "greenshields":
            return GreenshieldsDiagram.from_capacity(
                capacity, cfg.free_flow_speed)
        raise ConfigurationError(f"unknown diagram shape {cfg.shape!r}")

    def _resolve_dt(self) -> float:
        limit = min(ls.dx / ls.fd.max_wave_speed
                    for ls in self.links.values())
        if self.config.dt is None:
            return CFL_SAFETY * limit
        if self.config.dt > limit:
            raise ConfigurationError(
                f"dt={self.config.dt} violates the CFL bound {limit}")
        return self.config.dt

    # -- initial conditions ------------------------------------------------

    def reset_empty(self) -> None:
        self.t = 0.0
        for ls in self.links.values():
            ls.k.fill(0.0)
            ls.k1.fill(0.0)

    def set_link_profile(self, name: str, profile: LinkProfile,
                         fraction: float) -> None:
        self.links[name].set_cells(
            profile.cell_densities(self.config.cells_per_link), fraction)

    def state(self) -> NetworkState:
        return NetworkState(self.t, {n: (ls.k.copy(), ls.k1.copy())
                                     for n, ls in self.links.items()})

    # -- stepping ----------------------------------------------------------

    def _approach_demand(self, a: Approach,
                         demands: dict[str, np.ndarray]) -> float:
        if a.link is not None:
            return float(demands[a.link][-1])
        return a.demand

    def _branch_supply(self, b: Branch,
                       supplies: dict[str, np.ndarray]) -> float:
        if b.link is not None:
            return float(supplies[b.link][0])
        return b.supply

    def _junction_fluxes(self, demands, supplies, fracs):
        """(in_q, in_phi, out_q, out_phi) per link, plus boundary totals."""
        n = self.network
        in_q = {}; in_phi = {}; out_q = {}; out_phi = {}
        src_q = src_phi = snk_q = snk_phi = 0.0

        for o in n.origins:
            q = min(o.demand, float(supplies[o.link][0]))
            in_q[o.link], in_phi[o.link] = q, o.fraction * q
            src_q += q; src_phi += o.fraction * q
        for d in n.destinations:
            q = float(demands[d.link][-1])
            q = min(q, d.supply)
            frac = float(fracs[d.link][-1])
            out_q[d.link], out_phi[d.link] = q, frac * q
            snk_q += q; snk_phi += frac * q

        for dv in n.diverges:
            frac_up = float(fracs[dv.upstream][-1])
            xi = dv.xi if dv.xi is not None else frac_up
            d0 = float(demands[dv.upstream][-1])
            s1 = self._branch_supply(dv.branch1, supplies)
            s2 = self._branch_supply(dv.branch2, supplies)
            q0, q1, q2 = diverge_flux(d0, s1, s2, xi)
            out_q[dv.upstream], out_phi[dv.upstream] = q0, frac_up * q0
            if dv.xi is None:
                # Commodity-driven: branch 1 carries all of commodity 1.
                phi1, phi2 = q1, 0.0
            else:
                phi1, phi2 = frac_up * q1, frac_up * q2
            for br, q, phi in ((dv.branch1, q1, phi1), (dv.branch2, q2, phi2)):
                if br.link is not None:
                    in_q[br.link], in_phi[br.link] = q, phi
                else:
                    snk_q += q; snk_phi += phi

        for mg in n.merges:
            d1 = self._approach_demand(mg.approach1, demands)
            d2 = self._approach_demand(mg.approach2, demands)
            s3 = float(supplies[mg.downstream][0])
            _, q1, q2 = merge_flux(d1, d2, s3, mg.beta)
            phi3 = 0.0
            for a, q in ((mg.approach1, q1), (mg.approach2, q2)):
                if a.link is not None:
                    frac = float(fracs[a.link][-1])
                    out_q[a.link], out_phi[a.link] = q, frac * q
                    phi3 += frac * q
                else:
                    src_q += q
            # q1 + q2 equals min(d1+d2, s3); summing keeps the node exactly
            # conservative in floating point.
            in_q[mg.downstream], in_phi[mg.downstream] = q1 + q2, phi3
        return in_q, in_phi, out_q, out_phi, src_q, src_phi, snk_q, snk_phi

    def step(self):
        """Advance one dt; returns the junction flux maps for recording."""
        demands = {}; supplies = {}; fracs = {}
        for name, ls in self.links.items():
            demands[name] = _demand_array(ls.fd, ls.k)
            supplies[name] = _supply_array(ls.fd, ls.k)
            fracs[name] = ls.fractions()

        fluxes = self._junction_fluxes(demands, supplies, fracs)
        in_q, in_phi, out_q, out_phi = fluxes[:4]

        for name, ls in self.links.items():
            d, s, frac = demands[name], supplies[name], fracs[name]
            q_interior = np.minimum(d[:-1], s[1:])
            phi_interior = frac[:-1] * q_interior
            q_in = np.concatenate(([in_q[name]], q_interior))
            q_out = np.concatenate((q_interior, [out_q[name]]))
            phi_in = np.concatenate(([in_phi[name]], phi_interior))
            phi_out = np.concatenate((phi_interior, [out_phi[name]]))
            r = self.dt / ls.dx
            ls.k += r * (q_in - q_out)
            ls.k1 += r * (phi_in - phi_out)
            if in_q[name] > 0.0:
                ls.inflow_fraction = in_phi[name] / in_q[name]
        self.t += self.dt
        return fluxes

    def run(self, horizon: float | None = None) -> RunRecord:
        """Step until the horizon, recording boundary fluxes and totals."""
        horizon = self.config.horizon if horizon is None else horizon
        n_steps = int(round(horizon / self.dt))
        names = list(self.links)
        times = np.empty(n_steps)
        outflux = {n: np.empty(n_steps) for n in names}
        influx = {n: np.empty(n_steps) for n in names}
        vehicles = np.empty(n_steps)
        vehicles_c1 = np.empty(n_steps)
        b_in = np.empty(n_steps)
        b_out = np.empty(n_steps)
        cons = 0.0
        cons_c1 = 0.0
        prev_tot, prev_tot1 = self._totals()
        for i in range(n_steps):
            in_q, in_phi, out_q, out_phi, src, src1, snk, snk1 = self.step()
            times[i] = self.t
            for n in names:
                outflux[n][i] = out_q[n]
                influx[n][i] = in_q[n]
            tot, tot1 = self._totals()
            vehicles[i], vehicles_c1[i] = tot, tot1
            b_in[i], b_out[i] = src, snk
            cons = max(cons, abs(tot - prev_tot - self.dt * (src - snk)))
            cons_c1 = max(cons_c1,
                          abs(tot1 - prev_tot1 - self.dt * (src1 - snk1)))
            prev_tot, prev_tot1 = tot, tot1
        return RunRecord(self.dt, times, outflux, influx, vehicles,
                         vehicles_c1, b_in, b_out, cons, cons_c1,
                         self.state())

    def _totals(self) -> tuple[float, float]:
        tot = tot1 = 0.0
        for ls in self.links.values():
            v, v1 = ls.vehicles()
            tot += v; tot1 += v1
        return tot, tot1


def _demand_array(fd: FundamentalDiagram, k: np.ndarray) -> np.ndarray:
    if isinstance(fd, TriangularDiagram):
        return np.minimum(fd.free_flow_speed * k, fd.capacity)
    if isinstance(fd, GreenshieldsDiagram):
        kk = np.minimum(k, fd.critical_density)
        return fd.free_flow_speed * kk * (1.0 - kk / fd.jam_density)
    return np.array([fd.demand(x) for x in k])


def _supply_array(fd: FundamentalDiagram, k: np.ndarray) -> np.ndarray:
    if isinstance(fd, TriangularDiagram):
        return np.minimum(fd.capacity,
                          fd.congested_wave_speed * (fd.jam_density - k))
    if isinstance(fd, GreenshieldsDiagram):
        kk = np.maximum(k, fd.critical_density)
        return fd.free_flow_speed * kk * (1.0 - kk / fd.jam_density)
    return np.array([fd.supply(x) for x in k])


# ---------------------------------------------------------------------------
# Canned initial conditions.
# ---------------------------------------------------------------------------

def initialize_dm_stationary(sim: Simulation, spec: DmSpec,
                             state: StationaryState,
                             l1: float | None = None,
                             l2: float | None = None) -> None:
    """Load a stationary profile of the four-link network into the cells."""
    diagrams = tuple(sim.links[f"link{i}"].fd for i in range(4))
    profiles = stationary_profile(spec, state, l1, l2, diagrams)
    fractions = {"link0": spec.xi, "link1": 1.0, "link2": 0.0,
                 "link3": spec.xi}
    sim.t = 0.0
    for name, profile in profiles.items():
        sim.set_link_profile(name, profile, fractions[name])


def initialize_dmn_stationary(sim: Simulation, xi: float, scale: float = 1.0,
                              perturb: dict[str, float] | None = None) -> None:
    """Symmetric stationary state of the ring of stages, optionally with
    per-link density offsets (e.g. {"c1": +0.01})."""
    q = DMN_DEST_SUPPLY * scale          # per-stage through-flow
    q_narrow = xi * q
    q_wide = (1.0 - xi) * q
    sim.t = 0.0
    for name, ls in sim.links.items():
        fd = ls.fd
        if name.startswith("o"):
            k = fd.state_to_density(TrafficState(fd.capacity, q))
            frac = xi
        elif name.startswith("c"):
            k = fd.state_to_density(TrafficState(fd.capacity, q_narrow))
            frac = 1.0
        elif name.startswith("u"):
            k = fd.state_to_density(TrafficState(q_wide, fd.capacity))
            frac = 0.0
        else:  # destination links run exactly at capacity
            k = fd.critical_density
            frac = xi
        if perturb and name in perturb:
            k += perturb[name]
        ls.set_uniform(k, frac)


def initialize_beltway_congested(sim: Simulation, flow: float) -> None:
    """Uniform over-critical ring carrying the given initial flow."""
    sim.t = 0.0
    for ls in sim.links.values():
        if flow >= ls.fd.capacity:
            raise DomainError("initial ring flow must be below capacity")
        k = ls.fd.state_to_density(TrafficState(ls.fd.capacity, flow))
        ls.set_uniform(k, 0.0)
