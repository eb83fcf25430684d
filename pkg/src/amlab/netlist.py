"""Gate-level netlist for multiplier circuits.

A :class:`Circuit` is a DAG of single-bit nets and primitive cells (``AND2``,
``HA``, ``FA``). Nets and cells get dense integer ids in creation order. The
circuit is mutable while it is being assembled and becomes immutable once
:meth:`Circuit.seal` is called; all analysis works on sealed circuits.

Two serializations are supported: a structured JSON document and a line-based
text format. Both round-trip ids, names and connections exactly.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field

SCHEMA_VERSION = "1"


class CellKind(str, enum.Enum):
    AND2 = "AND2"
    HA = "HA"
    FA = "FA"

    @property
    def n_inputs(self) -> int:
        return 3 if self is CellKind.FA else 2

    @property
    def n_outputs(self) -> int:
        return 1 if self is CellKind.AND2 else 2


class NetlistError(Exception):
    """Raised for construction errors and malformed serialized netlists."""


class SealedError(NetlistError):
    pass


class CycleError(NetlistError):
    pass


@dataclass(frozen=True)
class Cell:
    id: int
    kind: CellKind
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    net: int | None = None
    cell: int | None = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass
class Circuit:
    """A multiplier netlist.

    ``x_inputs``, ``y_inputs`` and ``product_outputs`` are LSB first. The
    constant-zero net is an ordinary net with a distinguished role: it is
    driven by nothing inside the circuit and always carries 0.
    """

    name: str
    width: int
    net_names: list[str] = field(default_factory=list)
    cells: list[Cell] = field(default_factory=list)
    const_zero: int | None = None
    x_inputs: list[int] = field(default_factory=list)
    y_inputs: list[int] = field(default_factory=list)
    product_outputs: list[int] = field(default_factory=list)
    sealed: bool = False
    _driver: dict[int, int] = field(default_factory=dict, repr=False, compare=False)
    _by_name: dict[str, int] = field(default_factory=dict, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction -------------------------------------------------------

    def _check_open(self) -> None:
        if self.sealed:
            raise SealedError(f"circuit {self.name!r} is sealed")

    def _check_net(self, net: int) -> None:
        if not isinstance(net, int) or not 0 <= net < len(self.net_names):
            raise NetlistError(f"unknown net {net!r}")

    def add_net(self, name: str) -> int:
        self._check_open()
        if not name or any(ch.isspace() for ch in name):
            raise NetlistError(f"invalid net name {name!r}")
        if name in self._by_name:
            raise NetlistError(f"duplicate net name {name!r}")
        nid = len(self.net_names)
        self.net_names.append(name)
        self._by_name[name] = nid
        return nid

    def add_cell(self, kind: CellKind, inputs, outputs) -> int:
        self._check_open()
        kind = CellKind(kind)
        inputs, outputs = tuple(inputs), tuple(outputs)
        if len(inputs) != kind.n_inputs or len(outputs) != kind.n_outputs:
            raise NetlistError(
                f"arity mismatch for {kind.value}: expected {kind.n_inputs} inputs / "
                f"{kind.n_outputs} outputs, got {len(inputs)} / {len(outputs)}"
            )
        for net in inputs + outputs:
            self._check_net(net)
        if len(set(outputs)) != len(outputs):
            raise NetlistError(f"double-drive: {kind.value} drives the same net twice")
        for net in outputs:
            if self.is_externally_driven(net) or net in self._driver:
                raise NetlistError(f"double-drive of net {net} ({self.net_names[net]})")
        cid = len(self.cells)
        self.cells.append(Cell(cid, kind, inputs, outputs))
        for net in outputs:
            self._driver[net] = cid
        return cid

    def _claim_external(self, nets) -> None:
        for net in nets:
            self._check_net(net)
            if net in self._driver or self.is_externally_driven(net):
                raise NetlistError(f"double-drive of net {net} ({self.net_names[net]})")

    def set_const_zero(self, net: int) -> None:
        self._check_open()
        if self.const_zero is not None:
            raise NetlistError("const_zero already set")
        self._claim_external([net])
        self.const_zero = net

    def set_inputs(self, x_inputs, y_inputs) -> None:
        self._check_open()
        x_inputs, y_inputs = list(x_inputs), list(y_inputs)
        if len(x_inputs) != self.width or len(y_inputs) != self.width:
            raise NetlistError(f"expected {self.width} bits per operand")
        if self.x_inputs or self.y_inputs:
            raise NetlistError("inputs already declared")
        self._claim_external(x_inputs + y_inputs)
        if len(set(x_inputs + y_inputs)) != 2 * self.width:
            raise NetlistError("operand input nets must be distinct")
        self.x_inputs, self.y_inputs = x_inputs, y_inputs

    def set_outputs(self, product_outputs) -> None:
        self._check_open()
        product_outputs = list(product_outputs)
        if len(product_outputs) != 2 * self.width:
            raise NetlistError(f"expected {2 * self.width} product bits")
        for net in product_outputs:
            self._check_net(net)
        self.product_outputs = product_outputs

    def seal(self) -> "Circuit":
        self.sealed = True
        return self

    # -- queries ------------------------------------------------------------

    @property
    def n_nets(self) -> int:
        return len(self.net_names)

    def net_id(self, name: str) -> int:
        return self._by_name[name]

    def is_externally_driven(self, net: int) -> bool:
        return net == self.const_zero or net in self.x_inputs or net in self.y_inputs

    def driver(self, net: int) -> int | None:
        """Cell id driving ``net``, or None for primary inputs / const_zero / undriven."""
        return self._driver.get(net)

    def fanout(self) -> list[int]:
        """Number of cell input pins reading each net."""
        counts = [0] * self.n_nets
        for cell in self.cells:
            for net in cell.inputs:
                counts[net] += 1
        return counts

    def readers(self) -> list[list[int]]:
        """Cell ids reading each net, in cell-id order (duplicates collapsed)."""
        out: list[list[int]] = [[] for _ in range(self.n_nets)]
        for cell in self.cells:
            for net in dict.fromkeys(cell.inputs):
                out[net].append(cell.id)
        return out

    def cached(self, key, build):
        """Memoize derived data. Only valid on sealed circuits."""
        if not self.sealed:
            return build()
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def structurally_equal(self, other: "Circuit") -> bool:
        return (
            self.name == other.name
            and self.width == other.width
            and self.net_names == other.net_names
            and self.cells == other.cells
            and self.const_zero == other.const_zero
            and self.x_inputs == other.x_inputs
            and self.y_inputs == other.y_inputs
            and self.product_outputs == other.product_outputs
        )


# -- validation / levelization --------------------------------------------


def _find_cycle_cells(circuit: Circuit) -> list[int]:
    """Cells that cannot be ordered topologically (on or downstream of a cycle)."""
    pending = [0] * len(circuit.cells)
    readers = circuit.readers()
    for cell in circuit.cells:
        pending[cell.id] = sum(1 for net in cell.inputs if circuit.driver(net) is not None)
    ready = [c.id for c in circuit.cells if pending[c.id] == 0]
    done = set()
    while ready:
        cid = ready.pop()
        done.add(cid)
        for net in circuit.cells[cid].outputs:
            for r in readers[net]:
                pending[r] -= sum(1 for i in circuit.cells[r].inputs if i == net)
                if pending[r] == 0:
                    ready.append(r)
    return [c.id for c in circuit.cells if c.id not in done]


def validate(circuit: Circuit) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the circuit is valid."""
    diags: list[Diagnostic] = []
    n = circuit.n_nets
    drivers: dict[int, list[str]] = {i: [] for i in range(n)}
    if circuit.const_zero is not None:
        drivers.setdefault(circuit.const_zero, []).append("const_zero")
    for net in circuit.x_inputs + circuit.y_inputs:
        drivers.setdefault(net, []).append("input")

    for cell in circuit.cells:
        if len(cell.inputs) != cell.kind.n_inputs or len(cell.outputs) != cell.kind.n_outputs:
            diags.append(Diagnostic("arity", f"cell {cell.id} ({cell.kind.value}) has wrong arity", cell=cell.id))
        for net in cell.inputs + cell.outputs:
            if not 0 <= net < n:
                diags.append(Diagnostic("unknown net", f"cell {cell.id} references net {net}", net=net, cell=cell.id))
        for net in cell.outputs:
            if 0 <= net < n:
                drivers[net].append(f"cell {cell.id}")
        if set(cell.inputs) & set(cell.outputs):
            diags.append(Diagnostic("cycle", f"cell {cell.id} reads its own output", cell=cell.id))

    for net, who in drivers.items():
        if len(who) > 1:
            diags.append(Diagnostic("multiple drivers", f"net {net} driven by {', '.join(who)}", net=net))
        elif not who and net not in circuit.product_outputs:
            diags.append(Diagnostic("undriven net", f"net {net} ({circuit.net_names[net]}) has no driver", net=net))

    if len(circuit.product_outputs) != 2 * circuit.width:
        diags.append(Diagnostic("outputs", f"expected {2 * circuit.width} product outputs"))
    for net in circuit.product_outputs:
        if 0 <= net < n and not drivers[net]:
            diags.append(Diagnostic("undriven output", f"product output net {net} has no driver", net=net))
    if circuit.const_zero is None:
        diags.append(Diagnostic("const_zero", "no constant-zero net declared"))
    if len(circuit.x_inputs) != circuit.width or len(circuit.y_inputs) != circuit.width:
        diags.append(Diagnostic("inputs", f"expected {circuit.width} bits per operand"))

    if not any(d.code in ("unknown net", "cycle") for d in diags):
        for cid in _find_cycle_cells(circuit):
            diags.append(Diagnostic("cycle", f"cell {cid} lies on or after a combinational cycle", cell=cid))
    return diags


def levelize(circuit: Circuit) -> list[int]:
    """Topological level of every cell, indexed by cell id.

    A cell fed only by primary inputs or const_zero is level 0; any other cell
    sits one level above its deepest driving cell.
    """

    def build():
        stuck = _find_cycle_cells(circuit)
        if stuck:
            raise CycleError(f"combinational cycle through cells {stuck[:8]}")
        level = [-1] * len(circuit.cells)

        def visit(cid: int) -> int:
            stack = [cid]
            while stack:
                top = stack[-1]
                deps = [circuit.driver(net) for net in circuit.cells[top].inputs]
                deps = [d for d in deps if d is not None and level[d] < 0]
                if deps:
                    stack.extend(deps)
                    continue
                stack.pop()
                if level[top] < 0:
                    lv = [level[circuit.driver(net)] for net in circuit.cells[top].inputs if circuit.driver(net) is not None]
                    level[top] = 1 + max(lv) if lv else 0
            return level[cid]

        for cell in circuit.cells:
            visit(cell.id)
        return level

    return list(circuit.cached("levels", build))


def topo_order(circuit: Circuit) -> list[int]:
    """Cell ids sorted by (level, id)."""
    levels = levelize(circuit)
    return sorted(range(len(levels)), key=lambda c: (levels[c], c))


def cell_stats(circuit: Circuit) -> dict[CellKind, int]:
    counts = Counter(cell.kind for cell in circuit.cells)
    return {kind: counts.get(kind, 0) for kind in CellKind}


# -- serialization ----------------------------------------------------------


def export_circuit(circuit: Circuit, fmt: str = "structured") -> bytes:
    diags = validate(circuit)
    if diags:
        raise NetlistError("cannot export invalid circuit: " + "; ".join(map(str, diags[:5])))
    if fmt == "structured":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "name": circuit.name,
            "width": circuit.width,
            "const_zero": circuit.const_zero,
            "nets": [{"id": i, "name": nm} for i, nm in enumerate(circuit.net_names)],
            "cells": [
                {"id": c.id, "kind": c.kind.value, "inputs": list(c.inputs), "outputs": list(c.outputs)}
                for c in circuit.cells
            ],
            "x_inputs": circuit.x_inputs,
            "y_inputs": circuit.y_inputs,
            "product_outputs": circuit.product_outputs,
        }
        return (json.dumps(doc, indent=1) + "\n").encode()
    if fmt == "text":
        nm = circuit.net_names
        lines = [f"circuit {circuit.name} width {circuit.width}"]
        lines += [f"net {name}" for name in nm]
        lines.append(f"zero {nm[circuit.const_zero]}")
        lines.append("x " + " ".join(nm[i] for i in circuit.x_inputs))
        lines.append("y " + " ".join(nm[i] for i in circuit.y_inputs))
        lines.append("p " + " ".join(nm[i] for i in circuit.product_outputs))
        for c in circuit.cells:
            ins = " ".join(nm[i] for i in c.inputs)
            outs = " ".join(nm[i] for i in c.outputs)
            lines.append(f"{c.kind.value} {ins} -> {outs}")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")


def _import_structured(doc) -> Circuit:
    if not isinstance(doc, dict):
        raise NetlistError("malformed netlist: top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise NetlistError(f"schema-version mismatch: got {version!r}, expected {SCHEMA_VERSION!r}")
    try:
        circuit = Circuit(name=str(doc["name"]), width=int(doc["width"]))
        for pos, net in enumerate(doc["nets"]):
            if net["id"] != pos:
                raise NetlistError(f"malformed netlist: net ids not dense at {pos}")
            circuit.add_net(net["name"])
        circuit.set_const_zero(doc["const_zero"])
        circuit.set_inputs(doc["x_inputs"], doc["y_inputs"])
        for pos, cell in enumerate(doc["cells"]):
            if cell["id"] != pos:
                raise NetlistError(f"malformed netlist: cell ids not dense at {pos}")
            circuit.add_cell(CellKind(cell["kind"]), cell["inputs"], cell["outputs"])
        circuit.set_outputs(doc["product_outputs"])
    except (KeyError, TypeError, ValueError) as exc:
        raise NetlistError(f"malformed netlist: {exc!r}") from exc
    return circuit


def _import_text(text: str) -> Circuit:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 4 or lines[0][0] != "circuit" or lines[0][2] != "width":
        raise NetlistError("malformed netlist: missing 'circuit <name> width <n>' header")
    try:
        circuit = Circuit(name=lines[0][1], width=int(lines[0][3]))
        seen = set()
        outputs = None
        for toks in lines[1:]:
            head = toks[0]
            if head == "net" and len(toks) == 2:
                circuit.add_net(toks[1])
            elif head == "zero" and len(toks) == 2:
                circuit.set_const_zero(circuit.net_id(toks[1]))
            elif head in ("x", "y", "p"):
                seen.add(head)
                nets = [circuit.net_id(t) for t in toks[1:]]
                if head == "p":
                    outputs = nets
                elif head == "y":
                    if "x" not in seen:
                        raise NetlistError("malformed netlist: 'y' before 'x'")
                    circuit.set_inputs(xs, nets)
                else:
                    xs = nets
            elif head in CellKind.__members__:
                arrow = toks.index("->")
                ins = [circuit.net_id(t) for t in toks[1:arrow]]
                outs = [circuit.net_id(t) for t in toks[arrow + 1:]]
                circuit.add_cell(CellKind(head), ins, outs)
            else:
                raise NetlistError(f"malformed netlist line: {' '.join(toks)!r}")
        if outputs is None or {"x", "y"} - seen:
            raise NetlistError("malformed netlist: missing x/y/p declarations")
        circuit.set_outputs(outputs)
    except (KeyError, ValueError, IndexError) as exc:
        raise NetlistError(f"malformed netlist: {exc!r}") from exc
    return circuit


def import_circuit(data: bytes | str) -> Circuit:
    """Parse either serialization (detected by the leading character) and seal the result."""
    if isinstance(data, bytes):
        try:
            data = data.decode()
        except UnicodeDecodeError as exc:
            raise NetlistError("malformed netlist: not UTF-8") from exc
    stripped = data.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise NetlistError(f"malformed netlist: {exc}") from exc
        circuit = _import_structured(doc)
    else:
        circuit = _import_text(data)
    return circuit.seal()


def rewire_input(circuit: Circuit, cell_id: int, pin: int, net: int) -> Circuit:
    """Sealed copy of ``circuit`` with one cell input pin reconnected to ``net``.

    Used for fault injection; the copy is not validated.
    """
    copy = Circuit(name=circuit.name, width=circuit.width)
    for name in circuit.net_names:
        copy.add_net(name)
    copy.set_const_zero(circuit.const_zero)
    copy.set_inputs(circuit.x_inputs, circuit.y_inputs)
    for cell in circuit.cells:
        ins = list(cell.inputs)
        if cell.id == cell_id:
            copy._check_net(net)
            ins[pin] = net
        copy.add_cell(cell.kind, ins, cell.outputs)
    copy.set_outputs(circuit.product_outputs)
    return copy.seal()
