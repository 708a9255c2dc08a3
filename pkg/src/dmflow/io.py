"""CSV and JSON emitters.

All numbers are written with repr (shortest round-tripping form), CSV uses
comma separators, dot decimals, a header row and LF line endings, and no
output carries timestamps, so identical inputs produce byte-identical
files.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable

from .bifurcation import BifurcationPoint
from .ctm import RunRecord
from .validation import ValidationResult

__all__ = [
    "write_csv",
    "write_json",
    "orbit_rows",
    "cobweb_rows",
    "sweep_rows",
    "run_rows",
    "run_payload",
    "validation_payload",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: str | Path, header: Iterable[str],
              rows: Iterable[Iterable]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8",
                          newline="\n")


def write_json(path: str | Path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n",
                          encoding="utf-8", newline="\n")


def orbit_rows(orbit: list[float]) -> tuple[list[str], list[tuple]]:
    return ["step", "v"], [(i, v) for i, v in enumerate(orbit)]


def cobweb_rows(segments) -> tuple[list[str], list[tuple]]:
    header = ["segment", "x0", "y0", "x1", "y1"]
    rows = [(i, a[0], a[1], b[0], b[1])
            for i, (a, b) in enumerate(segments)]
    return header, rows


def sweep_rows(points: list[BifurcationPoint]) -> tuple[list[str], list[tuple]]:
    header = ["xi", "v_star", "stability", "v_minus", "v_plus"]
    rows = [(p.xi, p.v_star, p.stability.value, p.v_minus, p.v_plus)
            for p in points]
    return header, rows


def run_rows(record: RunRecord) -> tuple[list[str], list[tuple]]:
    """Long-format section flux series: one row per (time, link)."""
    header = ["t", "section", "flux"]
    rows = []
    names = sorted(record.outflux)
    for i, t in enumerate(record.times):
        for name in names:
            rows.append((float(t), name, float(record.outflux[name][i])))
    return header, rows


def run_payload(record: RunRecord) -> dict:
    return {
        "dt": record.dt,
        "times": [float(t) for t in record.times],
        "outflux": {n: [float(x) for x in xs]
                    for n, xs in sorted(record.outflux.items())},
        "vehicles": [float(x) for x in record.vehicles],
        "conservation_error": record.conservation_error,
    }


def validation_payload(result: ValidationResult) -> dict:
    report = result.report
    osc = result.oscillation
    return {
        "spec": {
            "c0": result.spec.c0, "c1": result.spec.c1,
            "c2": result.spec.c2, "c3": result.spec.c3,
            "beta": result.spec.beta, "xi": result.spec.xi,
        },
        "predicted": {
            "regime": report.regime.value,
            "stability": report.stability.value,
            "fixed_point": report.fixed_point,
            "period2": asdict(report.period2) if report.period2 else None,
        },
        "measured": {
            "verdict": osc.verdict.value,
            "value": osc.value,
            "low": osc.low,
            "high": osc.high,
            "period_estimate": osc.period_estimate,
        },
        "agrees": result.agrees,
        "v_star_rel_error": result.v_star_rel_error,
        "extrema_rel_errors": (list(result.extrema_rel_errors)
                               if result.extrema_rel_errors else None),
    }
