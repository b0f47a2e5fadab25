"""JSON and text renderings of pipeline results.

JSON documents carry ``"schema": "singlink/1"``; complex numbers are written
as ``[re, im]`` pairs and dictionaries keep a fixed key order, so the same
run configuration always produces the same bytes.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from singlink.braid import format_word
from singlink.census import CrossCheckVerdict
from singlink.common import format_bool_color
from singlink.pipeline import AnalysisResult, CensusEntry, CensusResult
from singlink.tracer import SampledLoop

logger = logging.getLogger(__name__)

SCHEMA = "singlink/1"


def complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def census_to_dict(verdict: CrossCheckVerdict) -> dict:
    census = verdict.census
    return {
        "label": verdict.label,
        "N": verdict.N,
        "Q": list(verdict.cascade.Q),
        "tau": list(verdict.cascade.tau),
        "sl_prop6": verdict.cascade.sl_prop6,
        "sl_prop6_matches": verdict.sl_prop6_matches,
        "lambda": census.lam,
        "r": census.r,
        "total_signed": census.total_signed,
        "root_count": census.root_count,
        "signed_pair_count": census.signed_pair_count,
        "records": [
            {
                "k": rec.k,
                "nu": complex_pair(rec.nu),
                "class_index": rec.class_index,
                "expected_count": rec.expected_count,
                "roots": [{"z": complex_pair(z), "sign": sign} for z, sign in rec.roots],
            }
            for rec in census.records
        ],
        "pairing_residual": census.pairing_residual,
        "annulus_clear": census.annulus_clear,
        "e_diagram": verdict.e_diagram,
        "e_census": verdict.e_census,
        "e_cascade": verdict.e_cascade,
        "framing_index": verdict.framing_index,
        "verdict": verdict.verdict,
        "notes": list(verdict.notes),
    }


def analysis_to_dict(result: AnalysisResult) -> dict:
    report = result.report
    return {
        "schema": SCHEMA,
        "command": "analyze",
        "epsilon": report.epsilon,
        "axis": report.axis,
        "components": [
            {
                "label": c.label,
                "N": c.N,
                "braid_index": c.braid_index,
                "winding_sign": c.winding_sign,
                "e": c.e,
                "e_pushoff": c.e_pushoff,
                "sl_paper": c.sl_paper,
                "sl_std": c.sl_std,
                "braid_word": format_word(c.braid_word),
                "generators": list(c.braid_word),
            }
            for c in report.components
        ],
        "lk": report.lk,
        "E": report.E,
        "formulas": report.formulas,
        "cross_checks": report.cross_check_dicts(),
        "census": census_to_dict(result.census[0]) if result.census else None,
        "notes": list(report.notes),
        "diagnostics": report.diagnostics,
    }


def _entry_to_dict(entry: CensusEntry) -> dict:
    if entry.error is not None:
        return {"label": entry.label, "error": "NotMW", "reason": entry.error}
    return {
        "label": entry.label,
        "stages": [
            {"mu": s.mu, "coefficient": complex_pair(s.coeff), "kind": s.kind.name.lower()}
            for s in entry.form.stages
        ],
        "root_classes": [
            {"index": cls.index, "k": list(cls.exponents), "size": len(cls.exponents)}
            for cls in entry.classes
        ],
        "census": census_to_dict(entry.verdict),
    }


def census_result_to_dict(result: CensusResult) -> dict:
    return {
        "schema": SCHEMA,
        "command": "census",
        "epsilon": result.epsilon,
        "disks": [_entry_to_dict(entry) for entry in result.entries],
    }


def trace_to_dict(loops: Sequence[SampledLoop]) -> dict:
    return {
        "schema": SCHEMA,
        "command": "trace",
        "loops": [loop.to_dict() for loop in loops],
    }


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_json(data: dict, path: str | Path | None) -> None:
    """Write to ``path``, or to stdout when the path is None or ``-``."""
    text = dumps(data)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"report written to {path}")


# text


def _verdict_lines(verdict: CrossCheckVerdict) -> list[str]:
    lines = [
        f"  census {verdict.label}: Q={verdict.cascade.Q} tau={verdict.cascade.tau} "
        f"sl_prop6={verdict.cascade.sl_prop6} total_signed={verdict.census.total_signed}",
        f"  e: diagram={verdict.e_diagram} census={verdict.e_census} cascade={verdict.e_cascade} "
        f"framing index={verdict.framing_index} -> {verdict.colored_verdict()}",
    ]
    lines.extend(f"  note: {note}" for note in verdict.notes)
    return lines


def analysis_text(result: AnalysisResult) -> str:
    report = result.report
    lines = [f"epsilon={report.epsilon:g} axis={report.axis}"]
    lines.append(f"{'label':<10} {'N':>3} {'n':>3} {'e':>4} {'push':>4} {'sl n-e':>6} {'sl e-n':>6}  word")
    for c in report.components:
        lines.append(
            f"{c.label:<10} {c.N:>3} {c.braid_index:>3} {c.e:>4} {c.e_pushoff:>4} "
            f"{c.sl_paper:>6} {c.sl_std:>6}  {format_word(c.braid_word)}"
        )
    if len(report.components) > 1:
        lines.append(f"lk = {report.lk}")
    lines.append(f"E = {report.E}")
    for name, value in report.formulas.items():
        if value is not None:
            lines.append(f"{name} = {value}")
    for check in report.cross_checks:
        lines.append(f"  {check.name}: {format_bool_color(check.passed, 'PASS', 'FAIL')} ({check.detail})")
    for verdict in result.census:
        lines.extend(_verdict_lines(verdict))
    lines.extend(f"note: {note}" for note in report.notes)
    return "\n".join(lines) + "\n"


def census_text(result: CensusResult) -> str:
    lines = []
    for entry in result.entries:
        if entry.error is not None:
            lines.append(f"{entry.label}: not in Micallef-White form ({entry.error})")
            continue
        lines.append(f"{entry.label}: N={entry.form.N} exponents={entry.form.exponents}")
        for cls in entry.classes:
            lines.append(
                f"  R_{cls.index}: k={list(cls.exponents)} expected roots per nu={cls.expected_count()}"
            )
        lines.extend(_verdict_lines(entry.verdict))
    return "\n".join(lines) + "\n"
