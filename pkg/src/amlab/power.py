"""Power, energy-delay and transistor accounting for multiplier netlists.

Total power is the sum of three terms:

* dynamic: ``sum_i vdd * vswing * C_load(i) * f * a_i`` over nets, where
  ``a_i`` is the switching activity of net ``i`` and ``C_load(i)`` is the unit
  input load times the number of cell pins the net drives;
* short-circuit: ``vdd * sum_cells I_sc(kind)``;
* static: ``vdd * sum_cells I_leak(kind)``.

EDP is ``power * delay**2`` (energy per operation ``power * delay`` times the
delay).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .netlist import CellKind, Circuit, cell_stats
from .sim import (
    ActivityProfile,
    ExhaustivePairs,
    activity_profile,
    static_critical_path,
    worst_dynamic_delay,
)
from .tech import TechProfile


def dynamic_power(circuit: Circuit, activity: ActivityProfile, tech: TechProfile) -> float:
    if len(activity.toggles) != circuit.n_nets:
        raise ValueError(
            f"activity profile covers {len(activity.toggles)} nets, circuit has {circuit.n_nets}"
        )
    load = np.asarray(circuit.fanout(), dtype=float) * tech.cload_per_input
    switched = float(np.dot(load, activity.activity()))
    return tech.vdd * tech.vswing * tech.freq * switched


@dataclass(frozen=True)
class PowerBreakdown:
    dynamic: float
    short_circuit: float
    static: float

    @property
    def total(self) -> float:
        return self.dynamic + self.short_circuit + self.static


def total_power(circuit: Circuit, activity: ActivityProfile, tech: TechProfile) -> PowerBreakdown:
    dyn = dynamic_power(circuit, activity, tech)
    counts = cell_stats(circuit)
    isc = sum(counts[k] * tech.isc_per_cell[k] for k in CellKind)
    leak = sum(counts[k] * tech.ileak_per_cell[k] for k in CellKind)
    return PowerBreakdown(dyn, tech.vdd * isc, tech.vdd * leak)


def edp(power: float, delay: float) -> float:
    if power < 0 or delay < 0:
        raise ValueError("power and delay must be non-negative")
    return power * delay * delay


def transistor_count(circuit: Circuit, tech: TechProfile) -> int:
    counts = cell_stats(circuit)
    return sum(counts[k] * tech.transistor_cost[k] for k in CellKind)


def percent_improvement(conv: float, prop: float) -> float:
    """Relative reduction from ``conv`` to ``prop``, in percent (unrounded)."""
    if conv <= 0:
        raise ValueError(f"baseline value must be positive, got {conv}")
    return (conv - prop) / conv * 100.0


# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisReport:
    design: str
    technology: str
    dynamic_power: float
    short_circuit_power: float
    static_power: float
    static_delay: float
    dynamic_delay: float | None
    transistor_count: int
    delay_source: str = "dynamic"

    @property
    def total_power(self) -> float:
        return self.dynamic_power + self.short_circuit_power + self.static_power

    @property
    def delay(self) -> float:
        """Delay used for EDP: the event-driven delay when measured, else the static bound."""
        if self.delay_source == "dynamic" and self.dynamic_delay is not None:
            return self.dynamic_delay
        return self.static_delay

    @property
    def edp(self) -> float:
        return edp(self.total_power, self.delay)


def analyze(
    circuit: Circuit,
    tech: TechProfile,
    source=None,
    *,
    design: str | None = None,
    dynamic: bool = True,
    seed: int = 0,
    workers: int | None = None,
) -> AnalysisReport:
    """Power, delay, EDP and transistor count of one design under one technology."""
    activity = activity_profile(circuit, source or ExhaustivePairs(), workers=workers)
    power = total_power(circuit, activity, tech)
    static = static_critical_path(circuit, tech).delay
    dyn = worst_dynamic_delay(circuit, tech, seed=seed).delay if dynamic else None
    return AnalysisReport(
        design=design or circuit.name,
        technology=tech.name,
        dynamic_power=power.dynamic,
        short_circuit_power=power.short_circuit,
        static_power=power.static,
        static_delay=static,
        dynamic_delay=dyn,
        transistor_count=transistor_count(circuit, tech),
        delay_source="dynamic" if dynamic else "static",
    )


METRICS = ("power", "delay", "edp", "transistors")


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    conventional: float
    proposed: float
    percent_improvement: float


@dataclass(frozen=True)
class ComparisonReport:
    technology: str
    rows: tuple[MetricComparison, ...]

    def __getitem__(self, metric: str) -> MetricComparison:
        for row in self.rows:
            if row.metric == metric:
                return row
        raise KeyError(metric)


def compare_metrics(technology: str, conv: dict, prop: dict) -> ComparisonReport:
    rows = []
    for metric in METRICS:
        if metric not in conv:
            continue
        pct = round(percent_improvement(conv[metric], prop[metric]), 2)
        rows.append(MetricComparison(metric, conv[metric], prop[metric], pct))
    return ComparisonReport(technology, tuple(rows))


def _metric_values(report: AnalysisReport) -> dict:
    return {
        "power": report.total_power,
        "delay": report.delay,
        "edp": report.edp,
        "transistors": report.transistor_count,
    }


def compare_designs(report_conv: AnalysisReport, report_prop: AnalysisReport) -> ComparisonReport:
    if report_conv.technology != report_prop.technology:
        raise ValueError(
            f"cannot compare across technologies ({report_conv.technology} vs {report_prop.technology})"
        )
    return compare_metrics(report_conv.technology, _metric_values(report_conv), _metric_values(report_prop))


# -- published table audit ---------------------------------------------------


@dataclass(frozen=True)
class PaperTableRow:
    label: str
    power: float
    delay: float
    edp_listed: float
    table: str = ""
    technology: str = ""
    design: str = ""
    cells: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for key in ("power", "delay", "edp_listed"):
            if getattr(self, key) <= 0:
                raise ValueError(f"row {self.label!r}: {key} must be positive")

    @property
    def edp_recomputed(self) -> float:
        return edp(self.power, self.delay)


@dataclass(frozen=True)
class RowCheck:
    label: str
    edp_listed: float
    edp_recomputed: float
    relative_error: float
    status: str
    nearest_label: str | None = None
    nearest_value: float | None = None


@dataclass(frozen=True)
class PercentCheck:
    technology: str
    metric: str
    conventional: float
    proposed: float
    percent: float
    printed: float | None = None


@dataclass
class ConsistencyReport:
    tolerance: float
    rows: list[RowCheck]
    percents: list[PercentCheck]

    def row(self, label: str) -> RowCheck:
        return next(r for r in self.rows if r.label == label)


def paper_check(rows, tolerance: float = 0.005, printed_percents: dict | None = None) -> ConsistencyReport:
    """Recompute EDP = P * t**2 for each listed row and flag disagreements.

    Anomalous rows also report which row's recomputed EDP lies closest to the
    listed value, which exposes shifted cells. Rows that share a technology and
    carry ``design`` labels ``Conventional``/``Proposed`` get their percent
    improvements recomputed from the listed values.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to check")
    if not 0 < tolerance:
        raise ValueError("tolerance must be positive")
    checks = []
    for row in rows:
        recomputed = row.edp_recomputed
        err = abs(row.edp_listed - recomputed) / row.edp_listed
        if err <= tolerance:
            checks.append(RowCheck(row.label, row.edp_listed, recomputed, err, "CONSISTENT"))
            continue
        others = [r for r in rows if r is not row]
        nearest = min(others, key=lambda r: abs(r.edp_recomputed - row.edp_listed), default=None)
        checks.append(
            RowCheck(
                row.label,
                row.edp_listed,
                recomputed,
                err,
                "ANOMALOUS",
                nearest.label if nearest else None,
                nearest.edp_recomputed if nearest else None,
            )
        )

    percents = []
    printed_percents = printed_percents or {}
    by_tech: dict[str, dict[str, PaperTableRow]] = {}
    for row in rows:
        if row.technology and row.design:
            by_tech.setdefault(row.technology, {})[row.design.lower()] = row
    for tech, pair in by_tech.items():
        if {"conventional", "proposed"} - set(pair):
            continue
        conv, prop = pair["conventional"], pair["proposed"]
        for metric, a, b in (
            ("power", conv.power, prop.power),
            ("delay", conv.delay, prop.delay),
            ("edp", conv.edp_listed, prop.edp_listed),
        ):
            printed = printed_percents.get(tech, {}).get(metric)
            percents.append(PercentCheck(tech, metric, a, b, percent_improvement(a, b), printed))
    return ConsistencyReport(tolerance, checks, percents)


def load_paper_tables(path=None) -> dict:
    """Embedded published cell and multiplier tables, or a user file of the same shape."""
    if path is None:
        text = resources.files("amlab").joinpath("data/paper_tables.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
        tables = {}
        for name, entries in doc["tables"].items():
            tables[name] = [
                PaperTableRow(
                    label=e["label"],
                    power=float(e["power"]),
                    delay=float(e["delay"]),
                    edp_listed=float(e["edp"]),
                    table=name,
                    technology=e.get("technology", ""),
                    design=e.get("design", ""),
                    cells=e.get("cells", {}),
                )
                for e in entries
            ]
        return {
            "tables": tables,
            "percents": doc.get("percents", {}),
            "transistors": doc.get("transistors", {}),
        }
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed table file: {exc}") from exc


# -- transistor cost calibration -------------------------------------------


@dataclass(frozen=True)
class CalibrationResult:
    feasible: list[dict]
    chosen: dict | None
    targets: dict


def calibrate_transistor_costs(
    census: dict[str, dict[CellKind, int]],
    targets: dict[str, int],
    lo: int = 2,
    hi: int = 24,
    anchor: tuple[CellKind, int] | None = (CellKind.FA, 16),
) -> CalibrationResult:
    """Integer per-kind costs in ``[lo, hi]`` reproducing every target total.

    ``census`` maps a design name to its cell counts; ``targets`` maps the same
    names to the required transistor totals. Among feasible assignments the
    one matching ``anchor`` is chosen when present, otherwise the first in
    lexicographic (AND2, HA, FA) order.
    """
    kinds = list(CellKind)
    feasible = []
    for costs in itertools.product(range(lo, hi + 1), repeat=len(kinds)):
        table = dict(zip(kinds, costs))
        if all(sum(census[d][k] * table[k] for k in kinds) == targets[d] for d in targets):
            feasible.append(table)
    chosen = None
    if anchor is not None:
        chosen = next((t for t in feasible if t[anchor[0]] == anchor[1]), None)
    if chosen is None and feasible:
        chosen = feasible[0]
    return CalibrationResult(feasible, chosen, dict(targets))


def report_dict(report: AnalysisReport) -> dict:
    out = asdict(report)
    out.update(total_power=report.total_power, delay=report.delay, edp=report.edp)
    return out
