"""Carry-save array multiplier generators.

Both designs share the AND-gate partial-product matrix. They differ in how the
last two vectors are resolved:

* ``build_conventional``: ``n-1`` carry-save rows of ``n`` adders each, carries
  forwarded diagonally to the next row, followed by an ``n``-cell ripple merge
  stage (HA at the bottom, FAs above).
* ``build_proposed``: no merge stage. The first row fills its spare carry-in
  slots with the third partial-product row, which leaves the final row free to
  act as a ripple row: the carry of each column enters the spare input of the
  next column to the left, and the carry of the top column is the product MSB.
  Adder count is ``n*(n-1)``, exactly ``n`` fewer than the conventional array.

Weights are LSB first; ``pp[i][j]`` is ``x_i AND y_j`` with weight ``i + j``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .netlist import Circuit, CellKind, NetlistError, validate


class FirstRowStyle(enum.Enum):
    FA_WITH_ZERO_CIN = "fa"
    HALF_ADDERS = "ha"


# (net, weight) pairs whose weighted sum equals x*y at a snapshot point
Frontier = list[tuple[int, int]]


@dataclass
class BuildTrace:
    """Snapshots taken after every adder row, used for conservation checks."""

    circuit: Circuit
    pp: list[list[int]]
    frontiers: list[tuple[str, Frontier]]


def _check_width(n: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"operand width must be an integer >= 2, got {n!r}")


def _new_circuit(name: str, n: int) -> tuple[Circuit, list[int], list[int]]:
    c = Circuit(name=name, width=n)
    zero = c.add_net("zero")
    c.set_const_zero(zero)
    xs = [c.add_net(f"x{i}") for i in range(n)]
    ys = [c.add_net(f"y{j}") for j in range(n)]
    c.set_inputs(xs, ys)
    return c, xs, ys


def build_partial_products(circuit: Circuit, x_inputs, y_inputs) -> list[list[int]]:
    """Add n*n AND2 cells; returns ``pp`` with ``pp[i][j] = x_i & y_j``."""
    n = len(x_inputs)
    if n < 2 or len(y_inputs) != n:
        raise ValueError("need two operands of equal width >= 2")
    pp = [[-1] * n for _ in range(n)]
    for j in range(n):
        for i in range(n):
            out = circuit.add_net(f"pp{i}_{j}")
            circuit.add_cell(CellKind.AND2, [x_inputs[i], y_inputs[j]], [out])
            pp[i][j] = out
    return pp


class _Rows:
    """Small helper that names adder nets by (row, weight)."""

    def __init__(self, circuit: Circuit):
        self.c = circuit
        self.zero = circuit.const_zero

    def adder(self, tag: str, row: int, weight: int, ins, kind: CellKind = CellKind.FA) -> tuple[int, int]:
        s = self.c.add_net(f"{tag}{row}_s{weight}")
        co = self.c.add_net(f"{tag}{row}_c{weight + 1}")
        if kind is CellKind.HA:
            ins = [i for i in ins if i != self.zero]
            while len(ins) < 2:
                ins.append(self.zero)
            if len(ins) != 2:
                raise NetlistError(f"half adder at row {row} weight {weight} has 3 live inputs")
        self.c.add_cell(kind, ins, [s, co])
        return s, co


def _frontier(product: dict[int, int], pending: dict[int, list[int]], pp, used: set[int]) -> Frontier:
    front = [(net, w) for w, net in sorted(product.items())]
    for w in sorted(pending):
        front += [(net, w) for net in pending[w]]
    n = len(pp)
    front += [(pp[i][j], i + j) for j in range(n) for i in range(n) if pp[i][j] not in used]
    return front


def trace_conventional(n: int, first_row: FirstRowStyle = FirstRowStyle.FA_WITH_ZERO_CIN) -> BuildTrace:
    _check_width(n)
    first_row = FirstRowStyle(first_row)
    c, xs, ys = _new_circuit(f"conventional{n}x{n}", n)
    pp = build_partial_products(c, xs, ys)
    rows = _Rows(c)
    zero = c.const_zero
    used: set[int] = set()
    product = {0: pp[0][0]}
    used.add(pp[0][0])
    frontiers = []

    # row 1: pp row 0 (shifted) + pp row 1; carry-in is zero
    kind = CellKind.HA if first_row is FirstRowStyle.HALF_ADDERS else CellKind.FA
    sums, carries = {}, {}
    for k in range(n):
        a = pp[k + 1][0] if k + 1 < n else zero
        b = pp[k][1]
        ins = [a, b] if kind is CellKind.HA else [a, b, zero]
        sums[k + 1], carries[k + 2] = rows.adder("r", 1, k + 1, ins, kind)
        used.update((a, b))
    product[1] = sums.pop(1)
    frontiers.append(("row1", _frontier(product, _merge(sums, carries), pp, used)))

    # rows 2..n-1: add pp row r; sums move right, carries drop straight down
    for r in range(2, n):
        new_s, new_c = {}, {}
        for k in range(n):
            w = k + r
            ins = [pp[k][r], sums.get(w, zero), carries[w]]
            new_s[w], new_c[w + 1] = rows.adder("r", r, w, ins)
            used.add(pp[k][r])
        sums, carries = new_s, new_c
        product[r] = sums.pop(r)
        frontiers.append((f"row{r}", _frontier(product, _merge(sums, carries), pp, used)))

    # ripple-carry merge over weights n..2n-1
    ripple = None
    for w in range(n, 2 * n):
        if ripple is None:
            s, ripple = rows.adder("m", 0, w, [sums[w], carries[w]], CellKind.HA)
        else:
            s, ripple = rows.adder("m", 0, w, [sums.get(w, zero), carries[w], ripple])
        product[w] = s
    frontiers.append(("merge", _frontier(product, {}, pp, used)))

    c.set_outputs([product[w] for w in range(2 * n)])
    return BuildTrace(_finish(c), pp, frontiers)


def _merge(sums: dict[int, int], carries: dict[int, int]) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for d in (sums, carries):
        for w, net in d.items():
            out.setdefault(w, []).append(net)
    return out


def trace_proposed(n: int) -> BuildTrace:
    _check_width(n)
    c, xs, ys = _new_circuit(f"proposed{n}x{n}", n)
    pp = build_partial_products(c, xs, ys)
    rows = _Rows(c)
    zero = c.const_zero
    used: set[int] = set()
    product = {0: pp[0][0]}
    used.add(pp[0][0])
    frontiers = []

    # pending[w] holds the live bits of weight w awaiting the next row
    if n == 2:
        pending = {1: [pp[1][0], pp[0][1]], 2: [pp[1][1]]}
        used.update((pp[1][0], pp[0][1], pp[1][1]))
        first_ripple_weight = 1
    else:
        # row 1 absorbs pp rows 0, 1 and 2; the spare carry-in slots take row 2
        sums, carries = {}, {}
        for k in range(n):
            a = pp[k + 1][0] if k + 1 < n else zero
            b = pp[k][1]
            cin = pp[k - 1][2] if k >= 1 else zero
            sums[k + 1], carries[k + 2] = rows.adder("r", 1, k + 1, [a, b, cin])
            used.update((a, b, cin))
        product[1] = sums.pop(1)
        pending = _merge(sums, carries)
        pending[n + 1].append(pp[n - 1][2])
        used.add(pp[n - 1][2])
        frontiers.append(("row1", _frontier(product, pending, pp, used)))

        # carry-save rows 2..n-2 each absorb pp row r+1
        for r in range(2, n - 1):
            q = r + 1
            sums, carries = {}, {}
            for w in range(r, n + r):
                ins = list(pending[w])
                i = w - q
                if 0 <= i < n:
                    ins.append(pp[i][q])
                    used.add(pp[i][q])
                ins += [zero] * (3 - len(ins))
                sums[w], carries[w + 1] = rows.adder("r", r, w, ins)
            product[r] = sums.pop(r)
            pending = _merge(sums, carries)
            pending[n + r].append(pp[n - 1][q])
            used.add(pp[n - 1][q])
            frontiers.append((f"row{r}", _frontier(product, pending, pp, used)))
        first_ripple_weight = n - 1

    # final row: each column's carry replaces the zero input of the next column
    ripple = zero
    for w in range(first_ripple_weight, 2 * n - 1):
        ins = list(pending.pop(w)) + [ripple]
        if len(ins) > 3:
            raise NetlistError(f"no spare input for the rerouted carry at weight {w}")
        ins += [zero] * (3 - len(ins))
        product[w], ripple = rows.adder("f", n - 1, w, ins)
    if pending:
        raise NetlistError(f"unconsumed bits at weights {sorted(pending)}")
    product[2 * n - 1] = ripple
    frontiers.append(("final", _frontier(product, {}, pp, used)))

    c.set_outputs([product[w] for w in range(2 * n)])
    return BuildTrace(_finish(c), pp, frontiers)


def _finish(c: Circuit) -> Circuit:
    diags = validate(c)
    if diags:
        raise NetlistError(f"builder produced an invalid circuit: {diags[0]}")
    return c.seal()


def build_conventional(n: int, first_row: FirstRowStyle = FirstRowStyle.FA_WITH_ZERO_CIN) -> Circuit:
    return trace_conventional(n, first_row).circuit


def build_proposed(n: int) -> Circuit:
    return trace_proposed(n).circuit


def build(design: str, n: int) -> Circuit:
    if design == "conventional":
        return build_conventional(n)
    if design == "proposed":
        return build_proposed(n)
    raise ValueError(f"unknown design {design!r}")
