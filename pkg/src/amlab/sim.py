"""Functional, switching-activity and timing simulation of sealed circuits.

Function and activity use zero-delay levelized semantics: every cell is
evaluated once per input vector in topological order, so glitches never
appear. Vectors are evaluated bit-parallel with numpy (one boolean row per
net, one column per vector).

Timing comes in two flavours. :func:`static_critical_path` is the topological
longest path, an upper bound. :func:`dynamic_settle_delay` runs an
event-driven simulation with one inertial delay per cell kind and reports when
the product outputs stop changing.

Vector sources
--------------
``ExhaustivePairs()`` yields every ``(x, y)`` in lexicographic order, ``x``
outer and ``y`` inner (index ``x * 2**n + y``). ``RandomSequence(seed, length)``
draws ``x`` then ``y`` as two arrays of ``length`` integers in ``[0, 2**n)``
from ``numpy.random.Generator(PCG64(seed))``.
"""

from __future__ import annotations

import heapq
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .netlist import CellKind, Circuit, NetlistError, topo_order

BATCH = 1 << 16
MAX_EXHAUSTIVE_WIDTH = 10


@dataclass(frozen=True)
class ExhaustivePairs:
    pass


@dataclass(frozen=True)
class RandomSequence:
    seed: int
    length: int


@dataclass(frozen=True)
class ExplicitSequence:
    """A fixed list of ``(x, y)`` vectors, applied in order."""

    vectors: tuple[tuple[int, int], ...]


def _check_vector(circuit: Circuit, x: int, y: int) -> None:
    top = 1 << circuit.width
    if not (0 <= x < top and 0 <= y < top):
        raise ValueError(f"vector ({x}, {y}) out of range for width {circuit.width}")


def source_length(circuit: Circuit, source) -> int:
    if isinstance(source, ExhaustivePairs):
        return 1 << (2 * circuit.width)
    if isinstance(source, RandomSequence):
        return source.length
    if isinstance(source, ExplicitSequence):
        return len(source.vectors)
    raise TypeError(f"unknown vector source {source!r}")


def source_vectors(circuit: Circuit, source, start: int = 0, stop: int | None = None):
    """Operand arrays ``(xs, ys)`` for positions ``start:stop`` of the source."""
    n = circuit.width
    total = source_length(circuit, source)
    stop = total if stop is None else stop
    if isinstance(source, ExhaustivePairs):
        idx = np.arange(start, stop, dtype=np.int64)
        return idx >> n, idx & ((1 << n) - 1)
    if isinstance(source, ExplicitSequence):
        for v in source.vectors:
            _check_vector(circuit, *v)
        arr = np.asarray(source.vectors, dtype=np.int64).reshape(-1, 2)[start:stop]
        return arr[:, 0], arr[:, 1]
    if source.length < 2:
        raise ValueError("random sequence length must be >= 2")
    rng = np.random.Generator(np.random.PCG64(source.seed))
    xs = rng.integers(0, 1 << n, size=source.length, dtype=np.int64)
    ys = rng.integers(0, 1 << n, size=source.length, dtype=np.int64)
    return xs[start:stop], ys[start:stop]


# -- zero-delay evaluation ------------------------------------------------


def _ops(circuit: Circuit):
    def build():
        return [circuit.cells[cid] for cid in topo_order(circuit)]

    return circuit.cached("ops", build)


def simulate(circuit: Circuit, xs, ys) -> np.ndarray:
    """Settled value of every net for each vector; shape ``(n_nets, len(xs))``."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    vals = np.zeros((circuit.n_nets, xs.size), dtype=bool)
    for i, net in enumerate(circuit.x_inputs):
        vals[net] = (xs >> i) & 1
    for i, net in enumerate(circuit.y_inputs):
        vals[net] = (ys >> i) & 1
    for cell in _ops(circuit):
        ins = cell.inputs
        if cell.kind is CellKind.AND2:
            np.logical_and(vals[ins[0]], vals[ins[1]], out=vals[cell.outputs[0]])
            continue
        a, b = vals[ins[0]], vals[ins[1]]
        half = a ^ b
        if cell.kind is CellKind.HA:
            vals[cell.outputs[0]] = half
            vals[cell.outputs[1]] = a & b
        else:
            c = vals[ins[2]]
            vals[cell.outputs[0]] = half ^ c
            vals[cell.outputs[1]] = (a & b) | (c & half)
    return vals


def decode_product(circuit: Circuit, vals: np.ndarray) -> np.ndarray:
    out = np.zeros(vals.shape[1], dtype=np.int64)
    for k, net in enumerate(circuit.product_outputs):
        out |= vals[net].astype(np.int64) << k
    return out


def evaluate(circuit: Circuit, x: int, y: int) -> int:
    _check_vector(circuit, x, y)
    return int(decode_product(circuit, simulate(circuit, [x], [y]))[0])


@dataclass
class VerifyResult:
    total: int
    passed: int
    failures: list[tuple[int, int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def summary(self) -> str:
        return f"{self.passed}/{self.total} passed"


def exhaustive_verify(circuit: Circuit, max_failures: int = 16) -> VerifyResult:
    """Apply all ``4**n`` operand pairs and compare against integer multiplication.

    ``failures`` holds up to ``max_failures`` counterexamples as
    ``(x, y, got, expected)``; ``passed`` always counts every pair.
    """
    n = circuit.width
    if n > MAX_EXHAUSTIVE_WIDTH:
        raise ValueError(f"exhaustive verification limited to width <= {MAX_EXHAUSTIVE_WIDTH}")
    source = ExhaustivePairs()
    total = source_length(circuit, source)
    passed = 0
    failures = []
    for start in range(0, total, BATCH):
        xs, ys = source_vectors(circuit, source, start, min(total, start + BATCH))
        got = decode_product(circuit, simulate(circuit, xs, ys))
        want = xs * ys
        bad = np.flatnonzero(got != want)
        passed += xs.size - bad.size
        for i in bad[: max(0, max_failures - len(failures))]:
            failures.append((int(xs[i]), int(ys[i]), int(got[i]), int(want[i])))
    return VerifyResult(total, passed, failures)


# -- switching activity ---------------------------------------------------


@dataclass
class ActivityProfile:
    toggles: np.ndarray
    vectors_applied: int

    def activity(self) -> np.ndarray:
        """Toggles per applied transition for every net."""
        if self.vectors_applied < 2:
            raise ValueError("activity needs at least two applied vectors")
        return self.toggles / (self.vectors_applied - 1)

    def write_csv(self, circuit: Circuit, path) -> None:
        act = self.activity()
        lines = ["net_id,name,toggles,activity"]
        for net, name in enumerate(circuit.net_names):
            lines.append(f"{net},{name},{int(self.toggles[net])},{act[net]:.4e}")
        Path(path).write_text("\n".join(lines) + "\n")


def default_workers() -> int:
    raw = os.environ.get("AMLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def _toggles(circuit: Circuit, source, start: int, stop: int) -> np.ndarray:
    # each batch re-evaluates the vector before ``start`` so boundary transitions count once
    counts = np.zeros(circuit.n_nets, dtype=np.int64)
    lo = max(0, start - 1)
    while lo < stop - 1:
        hi = min(stop, lo + BATCH)
        xs, ys = source_vectors(circuit, source, lo, hi)
        vals = simulate(circuit, xs, ys)
        counts += np.count_nonzero(vals[:, 1:] != vals[:, :-1], axis=1)
        lo = hi - 1
    return counts


def activity_profile(circuit: Circuit, source, workers: int | None = None) -> ActivityProfile:
    """Count output transitions on every net between consecutive settled states.

    The sequence is split into ``workers`` contiguous ranges evaluated on a
    thread pool; counts are summed, so the result does not depend on the split.
    """
    total = source_length(circuit, source)
    if total < 2:
        raise ValueError("activity needs at least two vectors")
    workers = workers or default_workers()
    bounds = np.linspace(0, total, workers + 1).astype(int)
    ranges = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if len(ranges) == 1:
        parts = [_toggles(circuit, source, *ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            parts = list(pool.map(lambda r: _toggles(circuit, source, *r), ranges))
    return ActivityProfile(np.sum(parts, axis=0), total)


# -- timing ---------------------------------------------------------------


@dataclass
class TimingResult:
    delay: float
    path: list[int] | None = None
    events: int | None = None


def static_critical_path(circuit: Circuit, tech) -> TimingResult:
    """Longest input-to-output path, summing one delay per cell kind."""
    arrival = [0.0] * circuit.n_nets
    via: dict[int, int] = {}
    for cell in _ops(circuit):
        t_out = max(arrival[net] for net in cell.inputs) + tech.cell_delay[cell.kind]
        for net in cell.outputs:
            arrival[net] = t_out
            via[net] = cell.id
    best = max(circuit.product_outputs, key=lambda net: arrival[net])
    path = []
    net = best
    while net in via:
        cell = circuit.cells[via[net]]
        path.append(cell.id)
        net = max(cell.inputs, key=lambda i: arrival[i])
    path.reverse()
    return TimingResult(arrival[best], path=path)


class _EventSim:
    """Event-driven simulator with per-kind inertial delays."""

    def __init__(self, circuit: Circuit, tech):
        self.circuit = circuit
        self.kinds = [c.kind for c in circuit.cells]
        self.ins = [c.inputs for c in circuit.cells]
        self.outs = [c.outputs for c in circuit.cells]
        self.delay = [tech.cell_delay[c.kind] for c in circuit.cells]
        if any(d <= 0 for d in self.delay):
            raise ValueError("dynamic timing needs strictly positive cell delays")
        self.readers = circuit.readers()
        self.is_output = [False] * circuit.n_nets
        for net in circuit.product_outputs:
            self.is_output[net] = True

    def _eval(self, cid: int, vals) -> tuple[int, ...]:
        kind = self.kinds[cid]
        ins = self.ins[cid]
        if kind is CellKind.AND2:
            return (vals[ins[0]] & vals[ins[1]],)
        s = vals[ins[0]] + vals[ins[1]]
        if kind is CellKind.FA:
            s += vals[ins[2]]
        return (s & 1, s >> 1)

    def settle(self, vals: list[int], changes: list[tuple[int, int]]) -> tuple[float, int]:
        """Apply input ``changes`` at t=0 to settled ``vals`` (modified in place)."""
        pending: dict[int, tuple[float, int]] = {}
        heap: list = []
        seq = 0
        events = 0
        last_out = 0.0
        touched = set()
        for net, v in changes:
            if vals[net] != v:
                vals[net] = v
                touched.update(self.readers[net])
        t = 0.0
        while True:
            for cid in sorted(touched):
                new = self._eval(cid, vals)
                t_fire = t + self.delay[cid]
                for net, v in zip(self.outs[cid], new):
                    if net in pending:
                        if v == vals[net]:
                            del pending[net]
                        continue
                    if v != vals[net]:
                        seq += 1
                        pending[net] = (t_fire, seq)
                        heapq.heappush(heap, (t_fire, seq, net, v))
            touched = set()
            while heap and not touched:
                t = heap[0][0]
                while heap and heap[0][0] == t:
                    _, s, net, v = heapq.heappop(heap)
                    if pending.get(net, (None, None))[1] != s:
                        continue
                    del pending[net]
                    vals[net] = v
                    events += 1
                    if self.is_output[net]:
                        last_out = t
                    touched.update(self.readers[net])
            if not touched:
                return last_out, events


def _settled_lists(circuit: Circuit, xs, ys) -> list[list[int]]:
    vals = simulate(circuit, xs, ys).astype(np.int8)
    return vals.T.tolist()


def _input_changes(circuit: Circuit, x: int, y: int) -> list[tuple[int, int]]:
    ch = [(net, (x >> i) & 1) for i, net in enumerate(circuit.x_inputs)]
    ch += [(net, (y >> i) & 1) for i, net in enumerate(circuit.y_inputs)]
    return ch


def dynamic_settle_delay(circuit: Circuit, tech, start: tuple[int, int], end: tuple[int, int]) -> TimingResult:
    """Time of the last product-output change after switching inputs from ``start`` to ``end``."""
    _check_vector(circuit, *start)
    _check_vector(circuit, *end)
    sim = _EventSim(circuit, tech)
    vals = _settled_lists(circuit, [start[0]], [start[1]])[0]
    delay, events = sim.settle(vals, _input_changes(circuit, *end))
    return TimingResult(delay, events=events)


def worst_dynamic_delay(circuit: Circuit, tech, pairs=None, seed: int = 0, samples: int = 2000) -> TimingResult:
    """Maximum settle delay over a set of (from, to) vector pairs.

    ``pairs`` defaults to every ordered pair of vectors for width <= 4 and to
    ``samples`` pairs drawn from ``numpy.random.Generator(PCG64(seed))``
    otherwise. ``path`` is left empty; ``events`` reports the settle event count
    of the worst pair.
    """
    n = circuit.width
    space = 1 << (2 * n)
    if pairs is None:
        if n <= 4:
            pairs = ((a, b) for a in range(space) for b in range(space))
        else:
            rng = np.random.Generator(np.random.PCG64(seed))
            idx = rng.integers(0, space, size=(samples, 2))
            pairs = [(int(a), int(b)) for a, b in idx]
    pairs = list(pairs)
    sim = _EventSim(circuit, tech)
    mask = (1 << n) - 1
    used = sorted({v for pair in pairs for v in pair})
    for v in used:
        if not 0 <= v < space:
            raise ValueError(f"vector index {v} out of range for width {n}")
    arr = np.asarray(used, dtype=np.int64)
    settled = dict(zip(used, _settled_lists(circuit, arr >> n, arr & mask)))
    changes = {v: _input_changes(circuit, v >> n, v & mask) for v in used}
    best = TimingResult(0.0, events=0)
    for a, b in pairs:
        if a == b:
            continue
        delay, events = sim.settle(list(settled[a]), changes[b])
        if delay > best.delay:
            best = TimingResult(delay, events=events)
    return best


def pair_index(circuit: Circuit, x: int, y: int) -> int:
    _check_vector(circuit, x, y)
    return (x << circuit.width) | y


__all__ = [
    "ActivityProfile",
    "ExhaustivePairs",
    "ExplicitSequence",
    "NetlistError",
    "RandomSequence",
    "TimingResult",
    "VerifyResult",
    "activity_profile",
    "dynamic_settle_delay",
    "evaluate",
    "exhaustive_verify",
    "simulate",
    "static_critical_path",
    "worst_dynamic_delay",
]
