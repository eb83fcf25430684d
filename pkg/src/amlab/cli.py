"""Command-line front end.

Exit codes: 0 success, 1 functional mismatch found by ``verify``, 2 invalid
arguments or malformed input file, 3 I/O error.
"""

from __future__ import annotations

import argparse
import enum
import sys
from dataclasses import dataclass
from pathlib import Path

from . import builders
from .netlist import NetlistError, export_circuit, import_circuit, validate
from .power import analyze, compare_designs, load_paper_tables, paper_check
from .reports import (
    analysis_csv,
    consistency_csv,
    improvement_csv,
    percent_csv,
    sci,
    write_report,
)
from .sim import ExhaustivePairs, RandomSequence, activity_profile, exhaustive_verify
from .tech import PROFILES, get_profile

MIN_WIDTH, MAX_WIDTH = 2, 10


class ExitCode(enum.IntEnum):
    OK = 0
    VERIFY_FAILED = 1
    USAGE = 2
    IO = 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class NetlistSource:
    path: str | None = None
    design: str | None = None
    width: int | None = None


@dataclass(frozen=True)
class Build:
    design: str
    width: int
    out_path: str
    format: str = "structured"
    first_row: str = "fa"


@dataclass(frozen=True)
class Verify:
    source: NetlistSource


@dataclass(frozen=True)
class Analyze:
    source: NetlistSource
    tech: str
    activity: str
    out_path: str
    seed: int = 0
    length: int = 4096
    format: str = "csv"
    activity_out: str | None = None
    dynamic: bool = True


@dataclass(frozen=True)
class Compare:
    tech: str
    width: int
    out_path: str
    seed: int = 0


@dataclass(frozen=True)
class PaperCheck:
    table_path: str | None
    tolerance: float = 0.005
    out_path: str | None = None


@dataclass(frozen=True)
class Export:
    source: NetlistSource
    format: str
    out_path: str


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _width(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"width must be an integer, got {text!r}")
    if not MIN_WIDTH <= n <= MAX_WIDTH:
        raise argparse.ArgumentTypeError(f"width must be in [{MIN_WIDTH}, {MAX_WIDTH}], got {n}")
    return n


def _tolerance(text: str) -> float:
    try:
        tol = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance must be a number, got {text!r}")
    if not 0 < tol <= 0.1:
        raise argparse.ArgumentTypeError(f"tolerance must be in (0, 0.1], got {tol}")
    return tol


def _path(text: str) -> str:
    if not text:
        raise argparse.ArgumentTypeError("path must be non-empty")
    return text


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--netlist", type=_path, help="netlist file (structured or text)")
    p.add_argument("--design", choices=["conventional", "proposed"])
    p.add_argument("--width", type=_width)


def _source(ns) -> NetlistSource:
    if ns.netlist:
        if ns.design or ns.width:
            raise UsageError("give either --netlist or --design/--width, not both")
        return NetlistSource(path=ns.netlist)
    if not ns.design or not ns.width:
        raise UsageError("need --netlist, or both --design and --width")
    return NetlistSource(design=ns.design, width=ns.width)


def _make_parser() -> _Parser:
    parser = _Parser(prog="amlab", description="Carry-save array multiplier lab")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("build", help="generate a multiplier netlist")
    p.add_argument("--design", choices=["conventional", "proposed"], required=True)
    p.add_argument("--width", type=_width, required=True)
    p.add_argument("--out", type=_path, required=True)
    p.add_argument("--format", choices=["structured", "text"], default="structured")
    p.add_argument("--first-row", choices=["fa", "ha"], default="fa",
                   help="conventional only: first row as FAs with zero carry-in, or half adders")

    p = sub.add_parser("verify", help="exhaustively check a netlist against integer multiplication")
    _add_source(p)

    p = sub.add_parser("analyze", help="power/delay/EDP/transistor report for one design")
    _add_source(p)
    p.add_argument("--tech", required=True, help="shipped profile name or JSON profile path")
    p.add_argument("--activity", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=4096)
    p.add_argument("--out", type=_path, required=True)
    p.add_argument("--format", choices=["csv", "structured"], default="csv")
    p.add_argument("--activity-out", type=_path)
    p.add_argument("--static-only", action="store_true", help="skip event-driven delay")

    p = sub.add_parser("compare", help="build both designs and compare them")
    p.add_argument("--tech", required=True)
    p.add_argument("--width", type=_width, required=True)
    p.add_argument("--out", type=_path, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("paper-check", help="audit the published table arithmetic")
    p.add_argument("--table", type=_path, help="table data file (defaults to the embedded copy)")
    p.add_argument("--tolerance", type=_tolerance, default=0.005)
    p.add_argument("--out", type=_path)

    p = sub.add_parser("export", help="convert a netlist between formats")
    _add_source(p)
    p.add_argument("--format", choices=["structured", "text"], required=True)
    p.add_argument("--out", type=_path, required=True)
    return parser


def parse_args(argv):
    ns = _make_parser().parse_args(list(argv))
    cmd = ns.command
    if cmd is None:
        raise UsageError("amlab: missing subcommand")
    if cmd == "build":
        return Build(ns.design, ns.width, ns.out, ns.format, ns.first_row)
    if cmd == "verify":
        return Verify(_source(ns))
    if cmd == "analyze":
        if ns.length < 2:
            raise UsageError("--length must be >= 2")
        return Analyze(_source(ns), ns.tech, ns.activity, ns.out, ns.seed, ns.length,
                       ns.format, ns.activity_out, not ns.static_only)
    if cmd == "compare":
        return Compare(ns.tech, ns.width, ns.out, ns.seed)
    if cmd == "paper-check":
        return PaperCheck(ns.table, ns.tolerance, ns.out)
    return Export(_source(ns), ns.format, ns.out)


# -- execution --------------------------------------------------------------


class _InputError(Exception):
    """Malformed input content (exit 2)."""


def _load(source: NetlistSource):
    if source.path is None:
        return builders.build(source.design, source.width)
    data = Path(source.path).read_bytes()
    try:
        circuit = import_circuit(data)
    except NetlistError as exc:
        raise _InputError(f"{source.path}: {exc}") from exc
    diags = validate(circuit)
    if diags:
        raise _InputError(f"{source.path}: invalid netlist: " + "; ".join(map(str, diags[:5])))
    if not MIN_WIDTH <= circuit.width <= MAX_WIDTH:
        raise _InputError(f"{source.path}: width {circuit.width} outside [{MIN_WIDTH}, {MAX_WIDTH}]")
    return circuit


def _tech(name: str):
    if name not in PROFILES and not Path(name).exists():
        raise _InputError(f"unknown technology {name!r}; shipped profiles: {', '.join(PROFILES)}")
    try:
        return get_profile(name)
    except ValueError as exc:
        raise _InputError(f"{name}: {exc}") from exc


def _improvement_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(f"{p.stem}_improvement{p.suffix or '.csv'}")


def _run(cmd, out) -> ExitCode:
    if isinstance(cmd, Build):
        if cmd.design == "conventional":
            circuit = builders.build_conventional(cmd.width, builders.FirstRowStyle(cmd.first_row))
        else:
            circuit = builders.build_proposed(cmd.width)
        Path(cmd.out_path).write_bytes(export_circuit(circuit, cmd.format))
        print(f"wrote {circuit.name} ({len(circuit.cells)} cells, {circuit.n_nets} nets) to {cmd.out_path}", file=out)
        return ExitCode.OK

    if isinstance(cmd, Verify):
        circuit = _load(cmd.source)
        result = exhaustive_verify(circuit)
        print(f"{circuit.name}: {result.summary()}", file=out)
        for x, y, got, want in result.failures:
            print(f"  counterexample: x={x} y={y} got={got} expected={want}", file=out)
        return ExitCode.OK if result.ok else ExitCode.VERIFY_FAILED

    if isinstance(cmd, Export):
        circuit = _load(cmd.source)
        Path(cmd.out_path).write_bytes(export_circuit(circuit, cmd.format))
        print(f"wrote {cmd.format} netlist to {cmd.out_path}", file=out)
        return ExitCode.OK

    if isinstance(cmd, Analyze):
        circuit = _load(cmd.source)
        tech = _tech(cmd.tech)
        source = ExhaustivePairs() if cmd.activity == "exhaustive" else RandomSequence(cmd.seed, cmd.length)
        report = analyze(circuit, tech, source, dynamic=cmd.dynamic, seed=cmd.seed)
        write_report(report, cmd.format, cmd.out_path)
        if cmd.activity_out:
            activity_profile(circuit, source).write_csv(circuit, cmd.activity_out)
        print(f"seed={cmd.seed} activity={cmd.activity}", file=out)
        print(analysis_csv([report]), end="", file=out)
        return ExitCode.OK

    if isinstance(cmd, Compare):
        tech = _tech(cmd.tech)
        reports = []
        for design in ("conventional", "proposed"):
            circuit = builders.build(design, cmd.width)
            reports.append(analyze(circuit, tech, ExhaustivePairs(), design=design, seed=cmd.seed))
        comparison = compare_designs(*reports)
        table = analysis_csv(reports)
        improvements = improvement_csv(comparison)
        Path(cmd.out_path).write_text(table)
        _improvement_path(cmd.out_path).write_text(improvements)
        print(f"seed={cmd.seed} tech={tech.name} width={cmd.width}", file=out)
        print(table, end="", file=out)
        print(improvements, end="", file=out)
        return ExitCode.OK

    if isinstance(cmd, PaperCheck):
        try:
            data = load_paper_tables(cmd.table_path)
        except ValueError as exc:
            raise _InputError(str(exc)) from exc
        rows = [row for table in data["tables"].values() for row in table]
        report = paper_check(rows, cmd.tolerance, data["percents"])
        if cmd.out_path:
            Path(cmd.out_path).write_text(consistency_csv(report))
            _improvement_path(cmd.out_path).write_text(percent_csv(report))
        for r in report.rows:
            line = f"{r.label:22s} listed={sci(r.edp_listed)} recomputed={sci(r.edp_recomputed)} {r.status}"
            if r.nearest_label:
                line += f" (listed value nearest to recomputed {r.nearest_label} = {sci(r.nearest_value)})"
            print(line, file=out)
        for p in report.percents:
            printed = f" printed={p.printed:.2f}" if p.printed is not None else ""
            print(f"{p.technology:7s} {p.metric:6s} {p.percent:.2f}%{printed}", file=out)
        return ExitCode.OK

    raise UsageError(f"unsupported command {cmd!r}")


def execute(cmd, out=None, err=None) -> ExitCode:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        return _run(cmd, out)
    except (_InputError, UsageError) as exc:
        print(f"error: {exc}", file=err)
        return ExitCode.USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return ExitCode.IO


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return int(ExitCode.USAGE)
    return int(execute(cmd))


if __name__ == "__main__":
    sys.exit(main())
