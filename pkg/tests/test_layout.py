from dataclasses import replace

import pytest

from vfabric.designs.arith import ClaSpec, gen_cla
from vfabric.dynlogic import Netlist
from vfabric.layout import (HDPP, LOGIC, SIGNAL, FanInError, area, calibrate, place, raw_area, rules_for,
                            sensitivity_sweep)


def tiny(n_gates, fan_in=2):
    nl = Netlist()
    names = [f"i{k}" for k in range(fan_in)]
    for n in names:
        nl.add_input(n)
    for g in range(n_gates):
        nl.add_gate(f"g{g}", 0, [names])
    return nl


def test_empty_netlist(bundle):
    plan = place(Netlist(), bundle.layout)
    assert plan.footprint == (0, 0)
    assert area(plan, bundle.layout) == 0
    assert plan.dump_grid() == ""


def test_two_gates_fill_one_logic_nanowire(bundle):
    plan = place(tiny(2), bundle.layout)
    assert plan.count(LOGIC) == 1
    assert plan.count(SIGNAL) == 1
    assert plan.assignments == [[0, 1]]


def test_fan_in_limit(bundle):
    with pytest.raises(FanInError):
        place(tiny(1, fan_in=9), bundle.layout)


@pytest.mark.parametrize("width", [4, 8])
def test_every_term_placed_once(bundle, width):
    nl = gen_cla(width).nl
    plan = place(nl, bundle.layout)
    flat = sorted(i for a in plan.assignments for i in a)
    assert flat == list(range(nl.stats()["terms"]))
    assert all(len(a) <= bundle.layout.gates_per_nanowire for a in plan.assignments)
    assert plan.count(HDPP) > 0


def test_signal_models(bundle):
    nl = gen_cla(4).nl
    nets = place(nl, bundle.layout)
    ratio = place(nl, replace(bundle.layout, signal_model="ratio"))
    assert nets.count(SIGNAL) == -(-len(nl.gates) // 2)
    assert ratio.count(SIGNAL) == ratio.count(LOGIC)


def test_calibration_anchor(bundle):
    nl = gen_cla(4).nl
    rules = calibrate(nl, bundle.layout, 0.76)
    assert area(place(nl, rules), rules) == pytest.approx(0.76, rel=1e-12)


@pytest.fixture(scope="module")
def calibrated(bundle):
    return calibrate(gen_cla(4).nl, bundle.layout, 0.76)


@pytest.mark.parametrize("spec, target", [(8, 1.34), (ClaSpec(16, 8), 2.15)])
def test_area_transfer(calibrated, spec, target):
    assert area(place(gen_cla(spec).nl, calibrated), calibrated) == pytest.approx(target, rel=0.25)


def test_area_grows_with_design_size(calibrated):
    areas = [area(place(gen_cla(s).nl, calibrated), calibrated) for s in (4, 8, ClaSpec(16, 8))]
    assert areas == sorted(areas)


def test_doubling_pitch_quadruples_raw_area(bundle):
    plan = place(gen_cla(4).nl, bundle.layout)
    wide = replace(bundle.layout, nanowire_pitch=2 * bundle.layout.nanowire_pitch)
    assert raw_area(plan, wide) == pytest.approx(4 * raw_area(plan, bundle.layout))


def test_identity_sweeps(calibrated):
    nl = gen_cla(4).nl
    base = area(place(nl, calibrated), calibrated)
    r = calibrated
    for axis, value in (("spacing", r.spacing), ("feature_size", r.nanowire_width),
                        ("aspect_ratio", r.nanowire_height / r.nanowire_width)):
        row = sensitivity_sweep(nl, r, axis, [value])[0]
        assert row.area == pytest.approx(base, rel=1e-12)
        assert row.ratio == pytest.approx(1.0)


def test_half_aspect_ratio(calibrated):
    nl = gen_cla(4).nl
    nominal = calibrated.nanowire_height / calibrated.nanowire_width
    base = place(nl, calibrated)
    row = sensitivity_sweep(nl, calibrated, "aspect_ratio", [nominal / 2])[0]
    assert row.gates_per_nanowire == calibrated.gates_per_nanowire // 2
    # doubles up to rounding of the last, partly filled nanowire
    assert 2 * base.count(LOGIC) - 1 <= row.logic_nanowires <= 2 * base.count(LOGIC)
    assert row.area == pytest.approx(1.11, rel=0.25)


def test_spacing_sweep_reports_both_models(calibrated):
    rows = sensitivity_sweep(gen_cla(4).nl, calibrated, "spacing", [16, 32, 48])
    assert [r.area for r in rows] == sorted(r.area for r in rows)
    last = rows[-1]
    pitch_ratio = last.pitch / rows[0].pitch
    assert last.ratio == pytest.approx(pitch_ratio**2)
    assert last.ratio_linear == pytest.approx(pitch_ratio)


def test_sweep_validation(bundle):
    with pytest.raises(ValueError):
        rules_for(bundle.layout, "spacing", 0)
    with pytest.raises(ValueError):
        rules_for(bundle.layout, "colour", 1)
