"""Command line: analyze | orbit | sweep | simulate | validate <scenario>.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 internal error.  Set DMFLOW_LOG=debug|info|warning for logging.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io
from .bifurcation import regime_boundaries, sweep_xi
from .errors import ConfigurationError, DmflowError
from .extended import (BeltwaySpec, beltway_classify, beltway_factor,
                       beltway_half_life, dmn_classify)
from .poincare import Regime, build_map, classify_stability, cobweb
from .scenario import Scenario, load_scenario
from .validation import validate_spec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def _outdir(args, scenario: Scenario) -> Path:
    out = Path(args.out if args.out else scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _format(args, scenario: Scenario) -> str:
    return args.format if args.format else scenario.out_format


def _scenario(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    if getattr(args, "xi", None) is not None:
        if scenario.kind != "dm":
            raise ConfigurationError("--xi override only applies to 'dm' "
                                     "scenarios")
        from .network import build_dm
        spec = scenario.dm_spec.with_xi(args.xi)
        network = build_dm(spec, scenario.origin_demand,
                           scenario.destination_supply)
        scenario = Scenario(**{**asdict_shallow(scenario),
                               "dm_spec": spec, "network": network,
                               "xi": args.xi})
    return scenario


def asdict_shallow(scenario: Scenario) -> dict:
    return {f: getattr(scenario, f)
            for f in scenario.__dataclass_fields__}


def cmd_analyze(args) -> int:
    scenario = _scenario(args)
    if scenario.kind == "dm":
        report = classify_stability(scenario.require_dm())
        payload = {
            "regime": report.regime.value,
            "stability": report.stability.value,
            "fixed_point": report.fixed_point,
            "max_steps": report.max_steps,
            "period2": asdict(report.period2) if report.period2 else None,
            "lyapunov_verdict": report.lyapunov_verdict,
            "boundaries": [
                {"xi": t.xi, "transition": t.describe()}
                for t in regime_boundaries(scenario.require_dm())],
        }
        if report.regime in (Regime.UPSTREAM_BOTTLENECK,
                             Regime.MIDDLE_BOTTLENECK):
            print(f"finite-time stable ({report.regime.value.replace('_', ' ')}):"
                  f" settles for any initial profile")
        else:
            print(f"regime: {report.regime.value}")
            print(f"stability: {report.stability.value}"
                  + (f" (converges in <= {report.max_steps} steps)"
                     if report.max_steps else ""))
            print(f"fixed point: v* = {report.fixed_point!r}")
            if report.period2 is not None:
                p = report.period2
                kind = "continuum endpoints" if p.continuum else "two-cycle"
                print(f"{kind}: ({p.v_minus!r}, {p.v_plus!r})")
    elif scenario.kind == "dmn":
        cls = dmn_classify(scenario.n, scenario.xi)
        payload = {
            "pattern": cls.pattern.value,
            "analyzed_band": cls.analyzed,
            "growth_factor": cls.growth_factor,
            "symmetric_point": list(cls.symmetric_point),
            "asymmetric_points": [list(p) for p in cls.asymmetric_points],
            "cycle": list(cls.cycle) if cls.cycle else None,
        }
        print(f"ring of {scenario.n} stage(s): {cls.pattern.value}"
              + ("" if cls.analyzed else " (outside analyzed band)"))
        print(f"perturbation growth per lap: {cls.growth_factor!r}")
    else:
        spec = BeltwaySpec(scenario.beta, scenario.xi, scenario.n)
        factor = beltway_factor(spec)
        cls = beltway_classify(spec)
        payload = {
            "classification": cls.value,
            "per_pair_ratio": factor.per_pair,
            "per_lap_ratio": factor.per_lap,
        }
        print(f"beltway with {scenario.n} ramp pair(s): {cls.value}")
        print(f"per-pair flux ratio: {factor.per_pair!r}")
        if factor.per_pair < 1.0:
            hl = beltway_half_life(spec)
            payload["half_life_pairs"] = hl.pairs
            print(f"flow half-life: {hl.pairs!r} pairs")
    io.write_json(_outdir(args, scenario) / "analysis.json", payload)
    return EXIT_OK


def cmd_orbit(args) -> int:
    scenario = _scenario(args)
    fmap = build_map(scenario.require_dm())
    orbit = fmap.iterate(args.v0, args.steps)
    segments = cobweb(fmap, args.v0, args.steps)
    out = _outdir(args, scenario)
    if _format(args, scenario) == "csv":
        io.write_csv(out / "orbit.csv", *io.orbit_rows(orbit))
        io.write_csv(out / "cobweb.csv", *io.cobweb_rows(segments))
    else:
        io.write_json(out / "orbit.json", {"orbit": orbit})
        io.write_json(out / "cobweb.json",
                      {"segments": [[list(a), list(b)]
                                    for a, b in segments]})
    print(f"orbit of {args.steps} step(s) from v0={args.v0!r}: "
          f"final v = {orbit[-1]!r}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _scenario(args)
    spec = scenario.require_dm()
    if args.step <= 0:
        raise ConfigurationError("--step must be positive")
    n = int(round((args.xi_max - args.xi_min) / args.step))
    grid = [args.xi_min + i * args.step for i in range(max(n, 0) + 1)
            if args.xi_min + i * args.step <= args.xi_max + 1e-15]
    points = sweep_xi(spec, grid)
    out = _outdir(args, scenario)
    if _format(args, scenario) == "csv":
        io.write_csv(out / "sweep.csv", *io.sweep_rows(points))
    else:
        io.write_json(out / "sweep.json", [
            {"xi": p.xi, "v_star": p.v_star, "stability": p.stability.value,
             "v_minus": p.v_minus, "v_plus": p.v_plus} for p in points])
    print(f"swept {len(points)} xi value(s); boundaries:")
    for t in regime_boundaries(spec):
        print(f"  xi = {t.xi!r}: {t.describe()}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = _scenario(args)
    sim = scenario.simulation()
    record = sim.run(args.horizon)
    out = _outdir(args, scenario)
    if _format(args, scenario) == "csv":
        io.write_csv(out / "run.csv", *io.run_rows(record))
    else:
        io.write_json(out / "run.json", io.run_payload(record))
    print(f"simulated {len(record.times)} step(s), dt = {record.dt!r}")
    print(f"conservation error: {record.conservation_error:.3e}")
    return EXIT_OK


def _validate_one(spec, args) -> tuple[bool, dict]:
    result = validate_spec(spec, horizon=args.horizon or 400.0)
    payload = io.validation_payload(result)
    ok = result.agrees
    if result.v_star_rel_error is not None:
        ok = ok and result.v_star_rel_error <= args.vstar_tol
    if result.extrema_rel_errors is not None:
        ok = ok and max(result.extrema_rel_errors) <= args.extrema_tol
    payload["pass"] = ok
    return ok, payload


def cmd_validate(args) -> int:
    scenario = _scenario(args)
    spec = scenario.require_dm()
    out = _outdir(args, scenario)
    if args.family:
        xis = np.arange(args.xi_step, 1.0, args.xi_step)
        results = []
        all_ok = True
        for xi in xis:
            ok, payload = _validate_one(spec.with_xi(float(xi)), args)
            results.append(payload)
            all_ok = all_ok and ok
            status = "pass" if ok else "FAIL"
            print(f"xi = {float(xi):.4f}: "
                  f"{payload['measured']['verdict']} [{status}]")
        io.write_json(out / "validation.json", results)
        return EXIT_OK if all_ok else EXIT_VALIDATION
    ok, payload = _validate_one(spec, args)
    io.write_json(out / "validation.json", payload)
    print(f"predicted: {payload['predicted']['stability']}, "
          f"measured: {payload['measured']['verdict']}")
    print("pass" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmflow",
        description="Kinematic-wave analysis of diverge-merge networks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario YAML file")
        p.add_argument("--xi", type=float, default=None,
                       help="override the route split of a dm scenario")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default=None)

    p = sub.add_parser("analyze", help="stability report of the return map")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("orbit", help="iterate the return map and emit "
                                     "orbit + cobweb data")
    common(p)
    p.add_argument("--v0", type=float, required=True, help="initial out-flux")
    p.add_argument("--steps", type=int, default=60)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("sweep", help="bifurcation sweep over the route split")
    common(p)
    p.add_argument("--xi-min", type=float, default=0.0)
    p.add_argument("--xi-max", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.001)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="run the cell-transmission model")
    common(p)
    p.add_argument("--horizon", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="simulate and compare against the "
                                        "analytic prediction")
    common(p)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--family", action="store_true",
                   help="sweep xi instead of validating a single value")
    p.add_argument("--xi-step", type=float, default=0.05)
    p.add_argument("--vstar-tol", type=float, default=0.01)
    p.add_argument("--extrema-tol", type=float, default=0.05)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("DMFLOW_LOG", "warning").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DmflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
