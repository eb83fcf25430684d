"""Bit-stable CSV/JSON writers for analysis, comparison and audit reports.

Floats are written in scientific notation with 5 significant digits,
percentages with 2 decimals, counts as integers.
"""

from __future__ import annotations

import json
from pathlib import Path

from .power import AnalysisReport, ComparisonReport, ConsistencyReport, report_dict

TABLE_HEADER = "technology,design,total_power_w,prop_delay_s,edp_js,transistors"
IMPROVEMENT_HEADER = "technology,metric,conventional,proposed,percent_improvement"


def sci(value: float) -> str:
    return f"{value:.4e}"


def _num(value) -> str:
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return sci(value)


def table_row(report: AnalysisReport) -> str:
    return ",".join(
        [
            report.technology,
            report.design,
            sci(report.total_power),
            sci(report.delay),
            sci(report.edp),
            str(report.transistor_count),
        ]
    )


def analysis_csv(reports) -> str:
    return "\n".join([TABLE_HEADER] + [table_row(r) for r in reports]) + "\n"


def improvement_csv(comparison: ComparisonReport) -> str:
    lines = [IMPROVEMENT_HEADER]
    for row in comparison.rows:
        lines.append(
            f"{comparison.technology},{row.metric},{_num(row.conventional)},"
            f"{_num(row.proposed)},{row.percent_improvement:.2f}"
        )
    return "\n".join(lines) + "\n"


def _round_floats(obj):
    if isinstance(obj, float):
        return float(sci(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def analysis_json(reports) -> str:
    docs = [_round_floats(report_dict(r)) for r in reports]
    return json.dumps(docs if len(docs) != 1 else docs[0], indent=2, sort_keys=True) + "\n"


def consistency_csv(report: ConsistencyReport) -> str:
    lines = ["label,edp_listed,edp_recomputed,relative_error,status,nearest_label,nearest_edp"]
    for r in report.rows:
        nearest = sci(r.nearest_value) if r.nearest_value is not None else ""
        lines.append(
            f"{r.label},{sci(r.edp_listed)},{sci(r.edp_recomputed)},{sci(r.relative_error)},"
            f"{r.status},{r.nearest_label or ''},{nearest}"
        )
    return "\n".join(lines) + "\n"


def percent_csv(report: ConsistencyReport) -> str:
    lines = ["technology,metric,conventional,proposed,percent_improvement,printed"]
    for p in report.percents:
        printed = f"{p.printed:.2f}" if p.printed is not None else ""
        lines.append(
            f"{p.technology},{p.metric},{sci(p.conventional)},{sci(p.proposed)},{p.percent:.2f},{printed}"
        )
    return "\n".join(lines) + "\n"


def write_report(report, fmt: str, path) -> None:
    """Write an AnalysisReport (or a list of them) or a ComparisonReport.

    ``fmt`` is ``csv`` or ``structured`` (JSON). Raises OSError on I/O failure.
    """
    if isinstance(report, ComparisonReport):
        if fmt == "csv":
            text = improvement_csv(report)
        else:
            doc = {"technology": report.technology, "rows": [r.__dict__ for r in report.rows]}
            text = json.dumps(_round_floats(doc), indent=2, sort_keys=True) + "\n"
    else:
        reports = report if isinstance(report, (list, tuple)) else [report]
        if fmt == "csv":
            text = analysis_csv(reports)
        elif fmt == "structured":
            text = analysis_json(reports)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    Path(path).write_text(text)
