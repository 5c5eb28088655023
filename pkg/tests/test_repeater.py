from dataclasses import replace

import numpy as np
import pytest

from vfabric import interconnect as ic
from vfabric import repeater as rp
from vfabric.params import DriverParams, TierParams

DRV = DriverParams(r0=8000.0, c0=1e-16, cp=1e-16, a=0.4, b=0.7)


def tier(**kw):
    base = dict(name="global", resistivity=5.26, aspect_ratio=2.34, pitch=152.0, beta=0.9)
    base.update(kw)
    return TierParams(**base)


def test_wire_resistance_worked_examples():
    # Ohm/nm -> Ohm/um
    assert rp.wire_rc(tier()).r_per_len * 1e3 == pytest.approx(3.89, rel=2e-3)
    local = tier(name="local", resistivity=6.96, aspect_ratio=2.0, pitch=38.0, beta=0.25)
    assert rp.wire_rc(local).r_per_len * 1e3 == pytest.approx(96.4, rel=2e-3)


def test_doubling_pitch_quarters_resistance():
    assert rp.wire_rc(tier(pitch=304.0)).r_per_len == pytest.approx(rp.wire_rc(tier()).r_per_len / 4)


def test_capacitance_override():
    assert rp.wire_rc(tier(c_per_len=2e-19)).c_per_len == 2e-19


def test_zero_length_delay_independent_of_size():
    w = rp.wire_rc(tier())
    d = [rp.segment_delay(0.0, s, DRV, w) for s in (1, 3, 17.5)]
    assert d == pytest.approx([DRV.b * DRV.r0 * (DRV.c0 + DRV.cp)] * 3)


def test_segment_delay_increasing_and_convex_in_length():
    w = rp.wire_rc(tier())
    l = np.linspace(0, 2e5, 50)
    d = np.array([rp.segment_delay(x, 10, DRV, w) for x in l])
    assert np.all(np.diff(d) > 0)
    assert np.all(np.diff(d, 2) >= -1e-24)


def test_segment_delay_independent_evaluation():
    w = rp.wire_rc(tier())
    for drv in (DRV, replace(DRV, a=0.9, b=2.2)):
        l, s = 5e4, 12.0
        r, c = w.r_per_len, w.c_per_len
        rt, cl, cp = drv.r0 / s, s * drv.c0, s * drv.cp
        expect = drv.b * rt * (cl + cp) + drv.b * (c * rt + r * cl) * l + drv.a * r * c * l**2
        assert rp.segment_delay(l, s, drv, w) == pytest.approx(expect, rel=1e-14)


def test_optimum_scaling_laws():
    w = rp.wire_rc(tier())
    lo, so = rp.optimal_segment(DRV, w)
    lo4, so4 = rp.optimal_segment(DRV, rp.WireRC(4 * w.r_per_len, 4 * w.c_per_len, "x"))
    assert lo4 == pytest.approx(lo / 4)
    # s_opt depends on c/r only
    assert so4 == pytest.approx(so)
    balanced = rp.WireRC(DRV.r0, DRV.c0, "x")
    assert rp.optimal_segment(DRV, balanced)[1] == pytest.approx(1.0)


@pytest.mark.parametrize("mode", ["cmos", "skybridge"])
@pytest.mark.parametrize("name", ["local", "semi_global", "global"])
def test_optimum_is_stationary(bundle, mode, name):
    drv = bundle.drivers[mode]
    w = rp.wire_rc(bundle.tiers[name], bundle.capacitance)
    lo, so = rp.optimal_segment(drv, w)
    f0 = rp.delay_per_length(lo, so, drv, w)
    for dl, ds in ((1e-5 * lo, 0), (0, 1e-5 * so)):
        g = (rp.delay_per_length(lo + dl, so + ds, drv, w) - rp.delay_per_length(lo - dl, so - ds, drv, w))
        step = dl or ds
        x = lo if dl else so
        assert abs(g / (2 * step)) * x / f0 <= 1e-6
    for kl in (0.9, 1.0, 1.1):
        for ks in (0.9, 1.0, 1.1):
            assert rp.delay_per_length(lo * kl, so * ks, drv, w) >= f0


def test_long_wire_probe(bundle):
    w = rp.wire_rc(bundle.tiers["global"], bundle.capacitance)
    lo, so = rp.optimal_segment(DRV, w)
    best = rp.segmented_delay(100 * lo, lo, so, DRV, w)
    for k in (0.9, 1.1):
        assert best <= rp.segmented_delay(100 * lo, k * lo, so, DRV, w)


def test_total_wire_delay_segments(bundle):
    w = rp.wire_rc(bundle.tiers["global"], bundle.capacitance)
    lo, so = rp.optimal_segment(DRV, w)
    assert rp.total_wire_delay(lo, DRV, w) == pytest.approx(rp.segment_delay(lo, so, DRV, w))
    assert rp.total_wire_delay(lo / 2, DRV, w) == pytest.approx(rp.segment_delay(lo / 2, so, DRV, w))
    d5 = rp.total_wire_delay(5 * lo, DRV, w)
    assert d5 == pytest.approx(5 * rp.segment_delay(lo, so, DRV, w))
    assert rp.total_wire_delay(50 * lo, DRV, w) < rp.segment_delay(50 * lo, so, DRV, w)


def test_repeater_convention():
    assert rp.repeaters_on_wire(0.5, 1.0) == 0
    assert rp.repeaters_on_wire(1.0, 1.0) == 0
    assert rp.repeaters_on_wire(3.0, 1.0) == 2
    assert rp.repeaters_on_wire(3.5, 1.0) == 3


def _tier_delay(bundle, fab, drv, name, l):
    w = rp.wire_rc(bundle.tiers[name], bundle.capacitance)
    return rp.total_wire_delay(l * fab.gate_pitch_h, drv, w)


@pytest.mark.parametrize("mode, ps", [("cmos", "cmos1"), ("cmos", "cmos2"), ("skybridge", "skybridge")])
def test_tier_boundaries(bundle, mode, ps):
    fab, dist, bounds, rep = rp.analyse(bundle, ps, mode)
    drv = bundle.drivers[mode]
    assert bounds.l_max_local <= bounds.l_max_semi_global <= bounds.l_max_global == dist.longest()
    t_glob = _tier_delay(bundle, fab, drv, "global", bounds.l_max_global)
    for name, lb in (("local", bounds.l_max_local), ("semi_global", bounds.l_max_semi_global)):
        ratio = bundle.tiers[name].beta / bundle.tiers["global"].beta if mode == "cmos" else 1.0
        target = ratio * t_glob
        assert _tier_delay(bundle, fab, drv, name, lb) <= target * (1 + 1e-12)
        if name == "semi_global":
            assert _tier_delay(bundle, fab, drv, name, lb + 1) > target
    assert all(t.repeaters >= 0 for t in rep.tiers)
    if mode == "skybridge":
        assert rep.tiers[0].repeaters == 0


def test_flat_distribution_boundaries(bundle):
    d = ic.InterconnectDistribution(np.arange(1, 11), np.array([5.0] + [0.0] * 9), 10, 1.0, 5.0)
    b = rp.classify(d, bundle.tiers, bundle.drivers["cmos"], "cmos", 150.0, bundle.capacitance)
    assert (b.l_max_local, b.l_max_semi_global, b.l_max_global) == (1, 1, 1)


def test_short_wires_need_no_repeaters(bundle):
    d = ic.InterconnectDistribution(np.arange(1, 4), np.array([10.0, 5.0, 1.0]), 3, 1.0, 16.0)
    drv = bundle.drivers["cmos"]
    b = rp.classify(d, bundle.tiers, drv, "cmos", 150.0, bundle.capacitance)
    assert rp.repeater_counts(d, b, bundle.tiers, drv, "cmos", 150.0, bundle.capacitance).total == 0


def test_repeaters_grow_with_gate_count(bundle):
    totals = [rp.analyse(bundle, "cmos1", "cmos", n)[3].total for n in (10**5, 10**6, 10**7)]
    assert totals == sorted(totals)


def test_repeater_reduction(bundle):
    sb = rp.analyse(bundle, "skybridge", "skybridge")[3].total
    cm = rp.analyse(bundle, "cmos1", "cmos")[3].total
    assert cm / sb >= 30
