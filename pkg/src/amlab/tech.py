"""Technology profiles: electrical parameters and per-cell costs.

The FA delays of the shipped profiles are the measured 16-T full-adder
propagation delays for each node. Load capacitance, clock frequency and the
short-circuit/leakage currents are placeholders (1 fF, 100 MHz, 0 A, 0 A);
absolute watts produced with them are only meaningful as a comparison between
designs evaluated under the same profile.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .netlist import CellKind

DEFAULT_TRANSISTORS = {CellKind.AND2: 8, CellKind.HA: 8, CellKind.FA: 16}

# fractions of the FA delay used for the cells the measurements do not cover
AND2_DELAY_FRACTION = 0.25
HA_DELAY_FRACTION = 0.5


def _per_kind(value) -> dict[CellKind, float]:
    if isinstance(value, dict):
        return {CellKind(k): value[k] for k in value}
    return {kind: value for kind in CellKind}


@dataclass(frozen=True)
class TechProfile:
    name: str
    vdd: float
    freq: float = 1e8
    cload_per_input: float = 1e-15
    cell_delay: dict = field(default_factory=lambda: _per_kind(0.0))
    isc_per_cell: dict = field(default_factory=lambda: _per_kind(0.0))
    ileak_per_cell: dict = field(default_factory=lambda: _per_kind(0.0))
    transistor_cost: dict = field(default_factory=lambda: dict(DEFAULT_TRANSISTORS))
    vswing: float | None = None

    def __post_init__(self):
        if self.vswing is None:
            object.__setattr__(self, "vswing", self.vdd)
        for key in ("cell_delay", "isc_per_cell", "ileak_per_cell", "transistor_cost"):
            table = {CellKind(k): v for k, v in getattr(self, key).items()}
            missing = set(CellKind) - set(table)
            if missing:
                raise ValueError(f"{key} missing entries for {sorted(k.value for k in missing)}")
            object.__setattr__(self, key, table)
        scalars = {"vdd": self.vdd, "vswing": self.vswing, "freq": self.freq, "cload_per_input": self.cload_per_input}
        for key, v in scalars.items():
            if v < 0:
                raise ValueError(f"{key} must be >= 0, got {v}")
        for key in ("cell_delay", "isc_per_cell", "ileak_per_cell"):
            for kind, v in getattr(self, key).items():
                if v < 0:
                    raise ValueError(f"{key}[{kind.value}] must be >= 0, got {v}")
        for kind, v in self.transistor_cost.items():
            if int(v) != v or v < 1:
                raise ValueError(f"transistor cost for {kind.value} must be a positive integer")
        if self.vswing > self.vdd:
            raise ValueError("vswing must not exceed vdd")

    def replace(self, **changes) -> "TechProfile":
        fields = self.to_dict()
        fields.update(changes)
        return TechProfile.from_dict(fields)

    def to_dict(self) -> dict:
        kinds = lambda d: {k.value: d[k] for k in CellKind}  # noqa: E731
        return {
            "name": self.name,
            "vdd": self.vdd,
            "vswing": self.vswing,
            "freq": self.freq,
            "cload_per_input": self.cload_per_input,
            "delays": kinds(self.cell_delay),
            "isc": kinds(self.isc_per_cell),
            "ileak": kinds(self.ileak_per_cell),
            "transistors": kinds(self.transistor_cost),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TechProfile":
        try:
            return cls(
                name=str(doc["name"]),
                vdd=float(doc["vdd"]),
                vswing=float(doc["vswing"]) if doc.get("vswing") is not None else None,
                freq=float(doc.get("freq", 1e8)),
                cload_per_input=float(doc.get("cload_per_input", 1e-15)),
                cell_delay=doc.get("delays") or doc["cell_delay"],
                isc_per_cell=doc.get("isc", doc.get("isc_per_cell", _per_kind(0.0))),
                ileak_per_cell=doc.get("ileak", doc.get("ileak_per_cell", _per_kind(0.0))),
                transistor_cost=doc.get("transistors", doc.get("transistor_cost", dict(DEFAULT_TRANSISTORS))),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed tech profile: {exc!r}") from exc

    @classmethod
    def load(cls, path) -> "TechProfile":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _profile(name: str, vdd: float, fa_delay: float) -> TechProfile:
    delays = {
        CellKind.AND2: AND2_DELAY_FRACTION * fa_delay,
        CellKind.HA: HA_DELAY_FRACTION * fa_delay,
        CellKind.FA: fa_delay,
    }
    return TechProfile(name=name, vdd=vdd, cell_delay=delays)


# vdd for 90nm/65nm are nominal core voltages; only tsmc180's 2.0 V is measured data
PROFILES = {
    "tsmc180": _profile("tsmc180", 2.0, 5.08e-10),
    "90nm": _profile("90nm", 1.2, 5.07e-10),
    "65nm": _profile("65nm", 1.0, 5.06e-10),
}


def get_profile(name_or_path: str) -> TechProfile:
    """Shipped profile by name, otherwise a JSON profile file."""
    if name_or_path in PROFILES:
        return PROFILES[name_or_path]
    return TechProfile.load(name_or_path)


def uniform_delay_profile(delay: float = 1.0, name: str = "uniform") -> TechProfile:
    return TechProfile(name=name, vdd=1.0, cell_delay=_per_kind(delay))
