import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amlab.builders import build_conventional, build_proposed
from amlab.netlist import CellKind, Circuit, cell_stats
from amlab.power import (
    AnalysisReport,
    PaperTableRow,
    analyze,
    calibrate_transistor_costs,
    compare_designs,
    compare_metrics,
    dynamic_power,
    edp,
    load_paper_tables,
    paper_check,
    percent_improvement,
    total_power,
    transistor_count,
)
from amlab.sim import ActivityProfile, ExhaustivePairs, RandomSequence, activity_profile
from amlab.tech import DEFAULT_TRANSISTORS, PROFILES, TechProfile, get_profile

from conftest import small_circuit


def _tech(**kw):
    base = dict(name="t", vdd=2.0, freq=1e8, cload_per_input=1e-15,
                cell_delay={"AND2": 1e-10, "HA": 2e-10, "FA": 4e-10})
    base.update(kw)
    return TechProfile(**base)


def test_dynamic_power_zero_activity(conv4):
    prof = ActivityProfile(np.zeros(conv4.n_nets, dtype=np.int64), 10)
    assert dynamic_power(conv4, prof, PROFILES["tsmc180"]) == 0.0


def test_dynamic_power_single_term():
    c = small_circuit(CellKind.AND2)  # x0 has fanout 1
    toggles = np.zeros(c.n_nets, dtype=np.int64)
    toggles[c.x_inputs[0]] = 1
    prof = ActivityProfile(toggles, 3)  # P = 1 / 2
    assert dynamic_power(c, prof, _tech()) == pytest.approx(2.0 * 2.0 * 1e-15 * 1e8 * 0.5, rel=1e-15)
    assert dynamic_power(c, prof, _tech()) == pytest.approx(2.0e-7, rel=1e-12)


def test_dynamic_power_fanout_weighting():
    c = small_circuit(CellKind.FA)
    assert c.fanout()[c.x_inputs[0]] == 1
    # x0 feeds both an AND input and the FA in the prop4 netlist
    p = build_proposed(4)
    fo = p.fanout()
    assert fo[p.x_inputs[0]] == 4 and fo[p.const_zero] == 4


def test_dynamic_power_profile_mismatch(conv4, prop4):
    prof = activity_profile(prop4, RandomSequence(0, 10))
    with pytest.raises(ValueError):
        dynamic_power(conv4, prof, PROFILES["tsmc180"])


@pytest.fixture(scope="module")
def conv_profile():
    c = build_conventional(4)
    return c, activity_profile(c, ExhaustivePairs())


def test_frequency_linearity(conv_profile):
    c, prof = conv_profile
    base = dynamic_power(c, prof, _tech())
    assert dynamic_power(c, prof, _tech(freq=2e8)) == pytest.approx(2 * base, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    f=st.floats(1e6, 1e10),
    k=st.floats(0.1, 10),
    vdd=st.floats(0.5, 3.0),
    cl=st.floats(1e-16, 1e-13),
)
def test_scaling_laws(conv_profile, f, k, vdd, cl):
    c, prof = conv_profile
    base = dynamic_power(c, prof, _tech(freq=f, vdd=vdd, vswing=vdd, cload_per_input=cl))
    assert dynamic_power(c, prof, _tech(freq=k * f, vdd=vdd, vswing=vdd, cload_per_input=cl)) == pytest.approx(k * base, rel=1e-12)
    assert dynamic_power(c, prof, _tech(freq=f, vdd=vdd, vswing=vdd, cload_per_input=k * cl)) == pytest.approx(k * base, rel=1e-12)
    assert dynamic_power(c, prof, _tech(freq=f, vdd=2 * vdd, vswing=2 * vdd, cload_per_input=cl)) == pytest.approx(4 * base, rel=1e-12)


def test_vswing_scaling(conv_profile):
    c, prof = conv_profile
    full = dynamic_power(c, prof, _tech(vdd=2.0))
    assert dynamic_power(c, prof, _tech(vdd=2.0, vswing=1.0)) == pytest.approx(full / 2, rel=1e-12)


def test_total_power_components(conv_profile):
    c, prof = conv_profile
    p = total_power(c, prof, _tech())
    assert p.short_circuit == 0 and p.static == 0 and p.total == p.dynamic
    leaky = _tech(isc_per_cell={"AND2": 1e-6, "HA": 2e-6, "FA": 3e-6}, ileak_per_cell={"AND2": 1e-9, "HA": 1e-9, "FA": 2e-9})
    q = total_power(c, prof, leaky)
    assert q.short_circuit == pytest.approx(2.0 * (16e-6 + 1 * 2e-6 + 15 * 3e-6))
    assert q.static == pytest.approx(2.0 * (16e-9 + 1e-9 + 30e-9))
    assert q.total == pytest.approx(q.dynamic + q.short_circuit + q.static)
    assert min(q.dynamic, q.short_circuit, q.static) >= 0


def test_total_power_empty_circuit():
    c = Circuit("e", 2)
    z = c.add_net("zero")
    c.set_const_zero(z)
    xs = [c.add_net("x0"), c.add_net("x1")]
    ys = [c.add_net("y0"), c.add_net("y1")]
    c.set_inputs(xs, ys)
    c.set_outputs([z] * 4)
    c.seal()
    prof = activity_profile(c, ExhaustivePairs())
    p = total_power(c, prof, _tech(isc_per_cell={"AND2": 1.0, "HA": 1.0, "FA": 1.0}))
    assert (p.dynamic, p.short_circuit, p.static, p.total) == (0, 0, 0, 0)


def test_proposed_lower_power_4x4():
    tech = PROFILES["tsmc180"]
    totals = {}
    for name, c in (("conv", build_conventional(4)), ("prop", build_proposed(4))):
        totals[name] = total_power(c, activity_profile(c, ExhaustivePairs()), tech).total
    assert totals["prop"] < totals["conv"]


@pytest.mark.parametrize(
    "power,delay,expected",
    [(8.88e-6, 5.08e-10, 2.29161e-24), (1.36e-5, 5.07e-10, 3.49587e-24),
     (6.15e-6, 5.06e-10, 1.57462e-24), (2.4628e-4, 1.6490e-9, 6.6968e-22)],
)
def test_edp_published_values(power, delay, expected):
    assert edp(power, delay) == pytest.approx(expected, rel=1e-3)


def test_edp_zero_and_negative():
    assert edp(0.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        edp(-1.0, 1.0)


def test_transistor_counts(conv4, prop4):
    tech = PROFILES["tsmc180"]
    assert transistor_count(conv4, tech) == 376
    assert transistor_count(prop4, tech) == 320
    assert transistor_count(conv4, tech) - transistor_count(prop4, tech) == 56
    fa, ha = DEFAULT_TRANSISTORS[CellKind.FA], DEFAULT_TRANSISTORS[CellKind.HA]
    assert 56 == 3 * fa + ha


def test_transistor_count_order_independent(conv4):
    cells = list(conv4.cells)
    random.Random(1).shuffle(cells)
    costs = PROFILES["tsmc180"].transistor_cost
    assert sum(costs[c.kind] for c in cells) == transistor_count(conv4, PROFILES["tsmc180"])


def test_calibration_search(conv4, prop4):
    census = {"conv": cell_stats(conv4), "prop": cell_stats(prop4)}
    result = calibrate_transistor_costs(census, {"conv": 376, "prop": 320})
    # brute-force oracle over the same box, written out independently
    oracle = [
        (a, h, f)
        for a in range(2, 25) for h in range(2, 25) for f in range(2, 25)
        if 16 * a + h + 15 * f == 376 and 16 * a + 12 * f == 320
    ]
    assert [(t[CellKind.AND2], t[CellKind.HA], t[CellKind.FA]) for t in result.feasible] == oracle
    assert result.chosen == DEFAULT_TRANSISTORS


def test_calibration_infeasible(conv4, prop4):
    census = {"conv": cell_stats(conv4), "prop": cell_stats(prop4)}
    # 16 a + 12 f is always even, so an odd proposed target has no solution
    result = calibrate_transistor_costs(census, {"conv": 376, "prop": 321})
    assert result.feasible == [] and result.chosen is None


@pytest.mark.parametrize(
    "conv,prop,expected",
    [(2.4628e-4, 2.1200e-4, 13.92), (1.6490e-9, 1.0867e-9, 34.10), (5.0, 5.0, 0.0), (376, 320, 14.89)],
)
def test_percent_examples(conv, prop, expected):
    report = compare_metrics("t", {"power": conv}, {"power": prop})
    assert report["power"].percent_improvement == expected


def test_percent_guard():
    with pytest.raises(ValueError):
        percent_improvement(0.0, 1.0)


def _report(design, tech="t", **kw):
    base = dict(design=design, technology=tech, dynamic_power=1e-5, short_circuit_power=1e-6,
                static_power=1e-7, static_delay=3e-9, dynamic_delay=2e-9, transistor_count=376)
    base.update(kw)
    return AnalysisReport(**base)


def test_compare_identity():
    r = _report("a")
    cmp = compare_designs(r, r)
    assert [row.percent_improvement for row in cmp.rows] == [0.0, 0.0, 0.0, 0.0]


def test_compare_cross_tech_rejected():
    with pytest.raises(ValueError):
        compare_designs(_report("a", "x"), _report("b", "y"))


def test_compare_nonpositive_baseline():
    with pytest.raises(ValueError):
        compare_designs(_report("a", dynamic_power=0, short_circuit_power=0, static_power=0), _report("b"))


def test_report_edp_uses_dynamic_delay():
    r = _report("a")
    assert r.total_power == pytest.approx(1.11e-5)
    assert r.edp == pytest.approx(edp(r.total_power, 2e-9))
    s = _report("a", dynamic_delay=None, delay_source="static")
    assert s.delay == 3e-9


def test_analyze_report_consistency(prop4):
    rep = analyze(prop4, PROFILES["65nm"], RandomSequence(0, 500), dynamic=False)
    assert rep.total_power == pytest.approx(rep.dynamic_power + rep.short_circuit_power + rep.static_power)
    assert rep.delay_source == "static" and rep.delay == rep.static_delay
    assert rep.edp == pytest.approx(rep.total_power * rep.delay**2)
    assert rep.transistor_count == 320


def test_paper_check_table1():
    rows = load_paper_tables()["tables"]["table1"]
    report = paper_check(rows)
    assert [r.status for r in report.rows] == ["CONSISTENT"] * 3
    assert report.row("16T-FA-90nm").edp_recomputed == pytest.approx(3.49587e-24, rel=1e-5)


def test_paper_check_table2():
    rows = load_paper_tables()["tables"]["table2"]
    report = paper_check(rows)
    status = {r.label: r.status for r in report.rows}
    assert status == {
        "conventional-0.18um": "CONSISTENT",
        "proposed-0.18um": "ANOMALOUS",
        "conventional-90nm": "ANOMALOUS",
        "proposed-90nm": "CONSISTENT",
        "conventional-65nm": "ANOMALOUS",
        "proposed-65nm": "CONSISTENT",
    }
    assert report.row("proposed-0.18um").edp_recomputed == pytest.approx(2.5035e-22, rel=5e-5)
    assert report.row("proposed-65nm").edp_recomputed == pytest.approx(2.01397e-22, rel=5e-5)
    # the listed proposed-0.18um EDP is the recomputed conventional-90nm value
    assert report.row("proposed-0.18um").nearest_label == "conventional-90nm"


def test_paper_check_percents():
    data = load_paper_tables()
    report = paper_check(data["tables"]["table2"], printed_percents=data["percents"])
    assert len(report.percents) == 9
    for p in report.percents:
        assert p.percent == pytest.approx(p.printed, abs=0.05)


def test_paper_check_guards():
    with pytest.raises(ValueError):
        paper_check([])
    with pytest.raises(ValueError):
        PaperTableRow("bad", 0.0, 1.0, 1.0)


def test_load_paper_tables_custom(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"tables": {"x": [{"label": "r", "power": 1.0, "delay": 2.0, "edp": 4.0}]}}))
    rows = load_paper_tables(path)["tables"]["x"]
    assert paper_check(rows).rows[0].status == "CONSISTENT"
    path.write_text("{not json")
    with pytest.raises(ValueError):
        load_paper_tables(path)


def test_tech_profile_round_trip(tmp_path):
    tech = PROFILES["tsmc180"]
    path = tmp_path / "tech.json"
    path.write_text(json.dumps(tech.to_dict()))
    assert get_profile(str(path)) == tech
    assert tech.vswing == tech.vdd == 2.0
    assert tech.cell_delay[CellKind.FA] == 5.08e-10
    assert tech.cell_delay[CellKind.AND2] == pytest.approx(0.25 * 5.08e-10)
    assert tech.cell_delay[CellKind.HA] == pytest.approx(0.5 * 5.08e-10)


@pytest.mark.parametrize(
    "bad",
    [dict(vdd=-1.0), dict(vswing=3.0), dict(transistor_cost={"AND2": 0, "HA": 8, "FA": 16}),
     dict(cell_delay={"AND2": 1.0, "HA": 1.0})],
)
def test_tech_profile_invariants(bad):
    with pytest.raises(ValueError):
        _tech(**bad)
