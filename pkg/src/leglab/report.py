"""Bit-stable report rendering.

The JSON format is canonical: fixed key order, exact scalar data as
"p/q" strings, approximate values as deterministic decimal strings, no
floating-point JSON numbers.  Two runs with the same configuration
produce byte-identical output; wall-clock timings appear only in the
text rendering.
"""

from __future__ import annotations

import json
from fractions import Fraction

import gmpy2

from .scalars import format_mpfr, format_rational

SCHEMA_VERSION = 1


def _sanitize(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, gmpy2.mpfr):
        return format_mpfr(value)
    if isinstance(value, float):
        return format(value, ".17e")
    if isinstance(value, str):
        return value
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return str(value)


def report_to_dict(report) -> dict:
    """Canonical ordered dictionary for a verification report."""
    out = {"schema": SCHEMA_VERSION}
    out["operation"] = report.operation
    out["variety"] = report.variety
    out["backend"] = report.backend
    if report.backend == "approx":
        out["precision_bits"] = report.precision_bits
    out["seed"] = report.seed
    out["samples_requested"] = report.samples_requested
    out["samples_evaluated"] = report.samples_evaluated
    out["ambient_dim"] = report.ambient_dim
    out["rank_histogram"] = {
        str(k): report.rank_histogram[k] for k in sorted(report.rank_histogram)
    }
    out["isotropy_violations"] = report.isotropy_violations
    if report.backend == "approx":
        out["worst_residual"] = _sanitize(report.worst_residual)
    out["witnesses"] = _sanitize(report.witnesses)
    out["details"] = _sanitize(report.details)
    out["verdict"] = report.verdict
    return out


def render_report(report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), separators=(",", ":")) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    d = report_to_dict(report)
    lines = [
        f"{d['operation']} on {d['variety']}  [{d['backend']}"
        + (f" @{d.get('precision_bits')} bits" if d["backend"] == "approx" else "")
        + "]",
        f"  seed {d['seed']}, samples {d['samples_evaluated']}/{d['samples_requested']},"
        f" ambient {d['ambient_dim']}",
        f"  rank histogram: {d['rank_histogram']}",
        f"  isotropy violations: {d['isotropy_violations']}",
    ]
    if d["backend"] == "approx" and d.get("worst_residual") is not None:
        lines.append(f"  worst residual: {d['worst_residual']}")
    for key, value in d["details"].items():
        if key == "records":
            lines.append(f"  probe records: {len(value)}")
            continue
        lines.append(f"  {key}: {value}")
    if d["witnesses"]:
        lines.append(f"  witnesses ({len(d['witnesses'])}):")
        for w in d["witnesses"][:5]:
            lines.append(f"    {w}")
    if getattr(report, "timings", None):
        for k, v in report.timings.items():
            lines.append(f"  time ({k}): {v:.3f}" if isinstance(v, float) else f"  time ({k}): {v}")
    lines.append(f"  verdict: {d['verdict'].upper()}")
    return "\n".join(lines) + "\n"


def exit_code_for(verdict: str) -> int:
    return {"pass": 0, "fail": 1}.get(verdict, 2)
