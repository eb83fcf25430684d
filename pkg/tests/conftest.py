import pytest

from amlab.builders import build_conventional, build_proposed
from amlab.netlist import CellKind, Circuit

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def small_circuit(kind: CellKind) -> Circuit:
    """Width-2 shell around a single cell reading x0, y0 (and x1 for FA).

    Product bits are [out0, out1-or-zero, zero, zero], so ``evaluate`` returns
    the cell's outputs as an integer.
    """
    c = Circuit(name=f"single_{kind.value}", width=2)
    zero = c.add_net("zero")
    c.set_const_zero(zero)
    x0, x1, y0, y1 = (c.add_net(n) for n in ("x0", "x1", "y0", "y1"))
    c.set_inputs([x0, x1], [y0, y1])
    ins = [x0, y0, x1] if kind is CellKind.FA else [x0, y0]
    outs = [c.add_net(f"o{i}") for i in range(kind.n_outputs)]
    c.add_cell(kind, ins, outs)
    c.set_outputs(outs + [zero] * (4 - len(outs)))
    return c.seal()


def ripple_chain(k: int) -> Circuit:
    """k full adders with the carry rippling through all of them."""
    c = Circuit(name=f"ripple{k}", width=k)
    zero = c.add_net("zero")
    c.set_const_zero(zero)
    xs = [c.add_net(f"x{i}") for i in range(k)]
    ys = [c.add_net(f"y{i}") for i in range(k)]
    c.set_inputs(xs, ys)
    carry, sums = zero, []
    for i in range(k):
        s, co = c.add_net(f"s{i}"), c.add_net(f"c{i + 1}")
        c.add_cell(CellKind.FA, [xs[i], ys[i], carry], [s, co])
        sums.append(s)
        carry = co
    c.set_outputs(sums + [carry] + [zero] * (k - 1))
    return c.seal()


@pytest.fixture(scope="session")
def conv4():
    return build_conventional(4)


@pytest.fixture(scope="session")
def prop4():
    return build_proposed(4)


def _criterion_key(name: str):
    # "6a. ..." sorts as (6, "a")
    tag = name.split()[0].rstrip(".")
    digits = "".join(ch for ch in tag if ch.isdigit())
    return int(digits), tag[len(digits):]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=_criterion_key):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
