#!/usr/bin/env python3
"""Search integer per-cell transistor costs that reproduce the 4x4 totals.

Builds both 4x4 multipliers, takes their cell census, and enumerates every
(AND2, HA, FA) cost triple in [2, 24] giving 376 transistors for the
conventional array and 320 for the proposed one. Prints all feasible triples
and the chosen default (the one with a 16-transistor full adder).

    python scripts/calibrate_costs.py
"""

import sys

from amlab.builders import build_conventional, build_proposed
from amlab.netlist import CellKind, cell_stats
from amlab.power import calibrate_transistor_costs
from amlab.tech import DEFAULT_TRANSISTORS

TARGETS = {"conventional": 376, "proposed": 320}


def main() -> int:
    census = {"conventional": cell_stats(build_conventional(4)), "proposed": cell_stats(build_proposed(4))}
    for design, counts in census.items():
        print(f"{design:12s} census " + " ".join(f"{k.value}={counts[k]}" for k in CellKind))
    result = calibrate_transistor_costs(census, TARGETS)
    for table in result.feasible:
        print("feasible     " + " ".join(f"{k.value}={table[k]}" for k in CellKind))
    if result.chosen is None:
        print("INFEASIBLE: no cost assignment reproduces the targets")
        return 1
    print("chosen       " + " ".join(f"{k.value}={result.chosen[k]}" for k in CellKind))
    matches = result.chosen == DEFAULT_TRANSISTORS
    print(f"defaults {'match' if matches else 'DIFFER FROM'} the chosen assignment")
    return 0 if matches else 1


if __name__ == "__main__":
    sys.exit(main())
