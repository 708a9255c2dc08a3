"""Scenario files: a declarative YAML document describing one experiment.

Sections: `network` (topology kind and its parameters), `diagram`
(flow-density shape and speeds), `simulation` (grid, time step, horizon),
`initial` (starting profile) and `output` (directory and format defaults).
The JSON-Schema used for validation is exported as SCENARIO_SCHEMA and
committed alongside the example scenarios.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import yaml

from .ctm import SimConfig, Simulation, initialize_beltway_congested
from .errors import ConfigurationError
from .network import DmSpec, Network, build_beltway, build_dm, build_dmn

__all__ = ["Scenario", "load_scenario", "SCENARIO_SCHEMA"]

SCENARIO_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "dmflow scenario",
    "type": "object",
    "required": ["network"],
    "additionalProperties": False,
    "properties": {
        "network": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["dm", "dmn", "beltway"]},
                "capacities": {
                    "type": "array", "items": {"type": "number",
                                               "exclusiveMinimum": 0},
                    "minItems": 4, "maxItems": 4,
                },
                "beta": {"type": "number", "minimum": 0, "maximum": 1},
                "xi": {"type": "number", "minimum": 0, "maximum": 1},
                "lengths": {
                    "type": "array", "items": {"type": "number",
                                               "exclusiveMinimum": 0},
                    "minItems": 4, "maxItems": 4,
                },
                "origin_demand": {"type": "number", "minimum": 0},
                "destination_supply": {"type": "number", "minimum": 0},
                "n": {"type": "integer", "minimum": 1},
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "pairs": {"type": "integer", "minimum": 1},
                "ring_capacity": {"type": "number", "exclusiveMinimum": 0},
                "segment_length": {"type": "number", "exclusiveMinimum": 0},
                "ramp_demand": {"type": "number", "minimum": 0},
                "offramp_supply": {"type": "number", "minimum": 0},
            },
        },
        "diagram": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "shape": {"enum": ["triangular", "greenshields"]},
                "free_flow_speed": {"type": "number", "exclusiveMinimum": 0},
                "congested_wave_speed": {"type": "number",
                                         "exclusiveMinimum": 0},
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cells_per_link": {"type": "integer", "minimum": 1},
                "dt": {
                    "anyOf": [{"type": "number", "exclusiveMinimum": 0},
                              {"const": "auto"}],
                },
                "horizon": {"type": "number", "minimum": 0},
            },
        },
        "initial": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["empty", "ring_flow"]},
                "flow": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "format": {"enum": ["csv", "json"]},
            },
        },
    },
}


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario: network description plus simulation settings."""

    kind: str
    network: Network
    sim: SimConfig
    dm_spec: DmSpec | None          # set for kind == "dm"
    xi: float
    beta: float
    n: int
    initial_kind: str
    initial_flow: float | None
    out_dir: str
    out_format: str
    origin_demand: float | None = None       # dm boundary overrides
    destination_supply: float | None = None

    def require_dm(self) -> DmSpec:
        if self.dm_spec is None:
            raise ConfigurationError(
                f"this command needs a 'dm' network, scenario has "
                f"{self.kind!r}")
        return self.dm_spec

    def simulation(self) -> Simulation:
        sim = Simulation(self.network, self.sim)
        if self.initial_kind == "ring_flow":
            if self.kind != "beltway":
                raise ConfigurationError(
                    "initial kind 'ring_flow' needs a beltway network")
            initialize_beltway_congested(sim, self.initial_flow)
        return sim


def _validate(doc: dict, source: str) -> None:
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        lines = [f"{source}: invalid scenario"]
        for e in errors:
            where = "/".join(str(p) for p in e.path) or "(root)"
            lines.append(f"  at {where}: {e.message}")
        raise ConfigurationError("\n".join(lines))


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"scenario file not found: {path}")
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" \
            if mark else ""
        raise ConfigurationError(f"{path}: YAML parse error{where}: {exc}")
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: scenario must be a mapping")
    _validate(doc, str(path))

    net_cfg = doc["network"]
    kind = net_cfg["kind"]
    dia = doc.get("diagram", {})
    sim_cfg = doc.get("simulation", {})
    dt = sim_cfg.get("dt")
    sim = SimConfig(
        cells_per_link=sim_cfg.get("cells_per_link", 20),
        dt=None if dt in (None, "auto") else float(dt),
        horizon=float(sim_cfg.get("horizon", 400.0)),
        free_flow_speed=float(dia.get("free_flow_speed", 1.0)),
        congested_wave_speed=float(dia.get("congested_wave_speed", 0.5)),
        shape=dia.get("shape", "triangular"),
    )

    def _need(key):
        if key not in net_cfg:
            raise ConfigurationError(
                f"{path}: network.{key} is required for kind {kind!r}")
        return net_cfg[key]

    dm_spec = None
    if kind == "dm":
        caps = _need("capacities")
        beta, xi = float(_need("beta")), float(_need("xi"))
        dm_spec = DmSpec(*caps, beta=beta, xi=xi,
                         lengths=tuple(net_cfg.get("lengths",
                                                   (1.0, 1.0, 1.0, 1.0))))
        network = build_dm(dm_spec, net_cfg.get("origin_demand"),
                           net_cfg.get("destination_supply"))
        n = 1
    elif kind == "dmn":
        n, xi = int(_need("n")), float(_need("xi"))
        beta = float(net_cfg.get("beta", 0.0))
        network = build_dmn(n, xi, scale=float(net_cfg.get("scale", 1.0)),
                            beta=beta)
    else:
        n, xi = int(_need("pairs")), float(_need("xi"))
        beta = float(_need("beta"))
        network = build_beltway(
            n, beta, xi,
            ring_capacity=float(net_cfg.get("ring_capacity", 1.0)),
            segment_length=float(net_cfg.get("segment_length", 1.0)),
            ramp_demand=net_cfg.get("ramp_demand"),
            offramp_supply=net_cfg.get("offramp_supply"))

    init = doc.get("initial", {"kind": "empty"})
    out = doc.get("output", {})
    return Scenario(
        kind=kind, network=network, sim=sim, dm_spec=dm_spec, xi=xi,
        beta=beta, n=n, initial_kind=init["kind"],
        initial_flow=init.get("flow"), out_dir=out.get("directory", "out"),
        out_format=out.get("format", "csv"),
        origin_demand=net_cfg.get("origin_demand"),
        destination_supply=net_cfg.get("destination_supply"))
