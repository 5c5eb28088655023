import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfabric import interconnect as ic
from vfabric.params import FabricParams


def fab(**kw):
    base = dict(rent_k=4.0, rent_p=0.66, fan_out=3.0, gate_pitch_h=1.0)
    base.update(kw)
    return FabricParams(**base)


@pytest.mark.parametrize("n, expect", [(16, 6), (4, 2), (64, 14), (10**7, 6322)])
def test_l_max_2d(n, expect):
    assert ic.l_max_2d(n) == expect


def test_l_max_3d():
    assert ic.l_max_3d(16, 1, 0) == 6
    assert ic.l_max_3d(8, 2, 1) == 3
    assert ic.l_max_3d(10**7, 2, 448 / 150) == math.floor(2 * (math.sqrt(5e6) - 1) + 448 / 150)
    with pytest.raises(ValueError):
        ic.l_max_2d(1)
    with pytest.raises(ValueError):
        ic.l_max_3d(1, 2, 1)


def test_m_2d_branches_meet():
    for span in (14.0, 100.0, 6324.0):
        near, far = ic.m2d_branches(span / 2, span)
        assert near == pytest.approx(span**3 / 24, rel=1e-14)
        assert far == pytest.approx(span**3 / 24, rel=1e-14)
    assert ic.m_2d(14, 14) == 0.0
    with pytest.raises(ValueError):
        ic.m_2d(0, 14)


@given(st.floats(4, 1e4), st.floats(0, 1))
def test_m_2d_non_negative(span, frac):
    l = 1 + frac * (span - 1)
    assert ic.m_2d(l, span) >= -1e-9 * span**3


def test_m_3d_reductions():
    l = np.arange(1, 14)
    np.testing.assert_array_equal(ic.m_3d(l, 14, 1, 0), ic.m_2d(l, 14))
    # below one layer step only the same-layer term survives, with multiplicity gz
    assert ic.m_3d(2, 14, 2, 3) == pytest.approx(2 * ic.m_2d(2, 14))


def test_block_counts():
    b = ic.block_counts_2d(1)
    assert (b.n_a, b.n_b, b.n_c) == (1.0, 0.0, 2.0)
    b = ic.block_counts_2d(3)
    assert (b.n_a, b.n_b, b.n_c) == (1.0, 6.0, 6.0)
    b3 = ic.block_counts_3d(2, 2, 3)
    assert (float(b3.n_b), float(b3.n_c)) == (2.0, 4.0)


def test_i_of_l_worked_example():
    # N_A=1, N_B=0, N_C=2
    expect = (0.75 * 4 / 2) * (1 - 0 + 2**0.66 - 3**0.66)
    assert ic.i_of_l(1, fab()) == pytest.approx(expect, rel=1e-12)


def test_i_of_l_vanishes_as_p_tends_to_one():
    assert abs(ic.i_of_l(5, fab(rent_p=1 - 1e-9))) < 1e-6


def test_i_of_l_decreasing_over_first_half():
    p = fab(n_gates=10**6)
    l = np.arange(1, ic.l_max_2d(p.n_gates) // 2)
    assert np.all(np.diff(ic.i_of_l(l, p)) < 0)


def test_i_total_worked_example():
    p = fab(rent_k=1, rent_p=0.5, fan_out=1, n_gates=2)
    assert ic.i_total(p) == pytest.approx(1 - 2**-0.5, rel=1e-12)


@pytest.mark.parametrize("name", ["skybridge", "cmos1", "cmos2"])
def test_distribution_normalised_and_non_negative(bundle, name):
    d = ic.distribution(bundle.fabric(name))
    assert abs(d.total() / d.i_total - 1) <= 1e-3
    assert np.all(d.counts >= 0)
    assert d.gamma > 0
    assert d.cumulative[-1] == pytest.approx(d.total())


def test_distribution_small_n_direct_sum():
    p = fab(n_gates=64)
    d = ic.distribution(p)
    span = 2 * math.sqrt(64)
    alpha_k = 0.75 * 4.0
    raw = []
    for l in range(1, 15):
        na, nb, nc = 1.0, l * (l - 1.0), 2.0 * l
        i = alpha_k * ((na + nb) ** 0.66 - nb**0.66 + (nb + nc) ** 0.66 - (na + nb + nc) ** 0.66) / nc
        m = l**3 / 3 - span * l**2 + span**2 / 2 * l if l < span / 2 else (span - l) ** 3 / 3
        raw.append(i * m)
    total = alpha_k * 64 * (1 - 64 ** (0.66 - 1))
    np.testing.assert_allclose(d.counts, np.array(raw) * total / sum(raw), rtol=1e-12)


def test_gz1_stack_equals_planar():
    a = ic.distribution(fab(n_gates=10**5))
    b = ic.distribution(fab(n_gates=10**5, gz=1, gate_pitch_v=500.0))
    np.testing.assert_array_equal(a.counts, b.counts)


def test_skybridge_longest_wire_shorter(bundle):
    sb = bundle.fabric("skybridge")
    c1 = bundle.fabric("cmos1")
    ratio = (ic.distribution(c1).longest() * c1.gate_pitch_h) / (ic.distribution(sb).longest() * sb.gate_pitch_h)
    assert 5 <= ratio <= 15


def brute_pairs(nx, ny, nz=1, pz=1):
    sites = list(product(range(nx), range(ny), range(nz)))
    hist = {}
    for i, a in enumerate(sites):
        for b in sites[i + 1:]:
            d = abs(a[0] - b[0]) + abs(a[1] - b[1]) + pz * abs(a[2] - b[2])
            hist[d] = hist.get(d, 0) + 1
    return hist


def test_pair_histogram_matches_loop():
    h = ic.pair_histogram(4, 3, 2, 2)
    assert {d: int(c) for d, c in enumerate(h) if c} == brute_pairs(4, 3, 2, 2)
    assert h.sum() == math.comb(24, 2)


def test_pair_count_correlation_planar():
    h = ic.pair_histogram(8, 8)
    l = np.arange(1, 15)
    r = np.corrcoef(h[1:15], ic.m_2d(l, ic.array_span(64)))[0, 1]
    assert r >= 0.98


def test_pair_count_correlation_stacked():
    h = ic.pair_histogram(4, 4, 2, 1)
    l = np.arange(1, len(h))
    r = np.corrcoef(h[1:], ic.m_3d(l, ic.array_span(16), 2, 1))[0, 1]
    assert r >= 0.98


def test_rent_fit_exact():
    k, p = ic.rent_fit([(n, 4 * n**0.66) for n in (2, 8, 32, 128)])
    assert k == pytest.approx(4, rel=1e-12)
    assert p == pytest.approx(0.66, rel=1e-12)


def test_rent_fit_merges_repeats_by_geometric_mean():
    merged = ic.rent_fit([(8, 2.0), (8, 8.0), (64, 16.0)])
    direct = ic.rent_fit([(8, 4.0), (64, 16.0)])
    assert merged == pytest.approx(direct)


def test_rent_fit_noisy_recovery():
    rng = np.random.default_rng(7)
    ns = np.repeat([4, 16, 64, 256, 1024], 4)
    data = [ic.RentDataPoint(int(n), 3.0 * n**0.6 * (1 + 0.01 * rng.standard_normal())) for n in ns]
    k, p = ic.rent_fit(data)
    assert k == pytest.approx(3.0, rel=0.02)
    assert p == pytest.approx(0.6, rel=0.02)


def test_rent_fit_degenerate():
    with pytest.raises(ValueError):
        ic.rent_fit([(8, 2.0), (8, 3.0)])


def test_gate_pitch():
    assert ic.gate_pitch([(2.0, 4, 2)]) == pytest.approx(1.0)
    assert ic.gate_pitch([(9.0, 9, 1), (4.0, 1, 1)]) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        ic.gate_pitch([(0.0, 4, 1)])
