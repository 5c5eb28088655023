import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfabric.dynlogic import (EVA, FLOATING, HOLD, PRE, Builder, FanInError, Netlist, NetlistError,
                              ReadFloatingError, Simulator, charge_share, micro_pipeline, run, stack_delay,
                              table_schedule)
from vfabric.dynlogic import netlist as nlio
from vfabric.dynlogic.builder import cover, prime_implicants
from vfabric.dynlogic.electrical import linear_fit_r2
from vfabric.dynlogic.sim import bits_to_int, int_to_bits


def dual_inputs(nl, *names):
    for n in names:
        nl.add_input(n)
        nl.add_input(n + "_n", complement_of=n)


def single_stage(terms, n_inputs=2):
    nl = Netlist()
    dual_inputs(nl, *"ab"[:n_inputs])
    nl.add_gate("y", 0, terms)
    nl.add_output("y")
    return nl


def eval_once(nl, **inputs):
    sch = micro_pipeline(nl.n_stages)
    sim = Simulator(nl, sch, lanes=len(next(iter(inputs.values()))))
    sim.set_inputs(inputs)
    for _ in range(sch.hold_slot(nl.n_stages - 1, 0) + 1):
        sim.step()
    return sim


A = np.array([0, 0, 1, 1], dtype=bool)
B = np.array([0, 1, 0, 1], dtype=bool)


def test_nand_term_truth_table():
    sim = eval_once(single_stage([["a", "b"]]), a=A, b=B)
    assert sim.values[sim.nl.net("y")].tolist() == [True, True, True, False]


def test_compound_xor():
    nl = single_stage([["a", "b"], ["a_n", "b_n"]])
    sim = eval_once(nl, a=A, b=B)
    assert sim.values[nl.net("y")].tolist() == [False, True, True, False]


def test_single_member_compound_equals_nand():
    for terms in ([["a"]], [["a", "b"]]):
        nl = single_stage(terms)
        sim = eval_once(nl, a=A, b=B)
        expect = ~np.all([{"a": A, "b": B}[n] for n in terms[0]], axis=0)
        assert sim.values[nl.net("y")].tolist() == expect.tolist()


def test_evaluate_while_producer_precharges():
    nl = Netlist()
    dual_inputs(nl, "a")
    nl.add_gate("y", 0, [["a"]])
    nl.add_gate("z", 1, [["y"]])
    sim = Simulator(nl, table_schedule(2, [{0: PRE, 1: EVA}]))
    sim.set_inputs({"a": 1})
    with pytest.raises(ReadFloatingError, match="stage 1"):
        sim.step()


def test_floating_outside_window():
    nl = single_stage([["a", "b"]])
    sch = table_schedule(1, [{0: PRE}, {0: EVA}, {0: HOLD}])
    sim = Simulator(nl, sch)
    sim.set_inputs({"a": 1, "b": 1})
    sim.step()
    assert sim.snapshot([nl.net("y")])[0, 0] == FLOATING
    sim.step()
    assert sim.snapshot([nl.net("y")])[0, 0] == 0


def two_stage_xor():
    b = Builder()
    a, c = b.input("a"), b.input("b")
    x = b.xor(a, c, 0, name="x")
    y = b.at(x, 1)
    b.output(y)
    return b.nl, y


def test_cascaded_xor_stream():
    nl, y = two_stage_xor()
    waves = [{"a": a, "b": c} for a, c in itertools.product((0, 1), repeat=2)]
    sch = micro_pipeline(nl.n_stages)
    trace = run(nl, sch, waves)
    ev = trace.samples(y.t)[:4]
    assert [int(v[0]) for _, v in ev] == [a ^ c for a, c in itertools.product((0, 1), repeat=2)]
    # each wave leaves the second stage one cycle after entering the first
    assert [s for s, _ in ev] == [sch.hold_slot(1, k) for k in range(4)]
    assert sch.hold_slot(1, 0) // sch.cycle + 1 == 2


def test_single_rail_inverter_stage():
    nl = Netlist()
    nl.add_input("a")
    nl.add_input("b")
    nl.add_gate("y", 0, [["a", "b"]])
    nl.add_gate("z", 1, [["y"]])
    nl.add_output("y")
    nl.add_output("z")
    waves = [{"a": a, "b": c} for a, c in itertools.product((0, 1), repeat=2)]
    sch = micro_pipeline(2, rail="single")
    trace = run(nl, sch, waves)
    ys = [int(v[0]) for _, v in trace.samples("y")[:4]]
    zs = [int(v[0]) for _, v in trace.samples("z")[:4]]
    assert ys == [1, 1, 1, 0]
    assert zs == [1 - y for y in ys]
    assert trace.samples("z")[0][0] - trace.samples("y")[0][0] == 2


def test_constant_input_reaches_periodic_state():
    nl, _ = two_stage_xor()
    sch = micro_pipeline(nl.n_stages)
    trace = run(nl, sch, [{"a": 1, "b": 0}], slots=30)
    snaps = trace.snapshots
    for k in range(9, 27):
        np.testing.assert_array_equal(snaps[k], snaps[k + sch.cycle])


def test_trace_is_deterministic():
    nl, _ = two_stage_xor()
    waves = [{"a": 1, "b": 0}, {"a": 1, "b": 1}]
    t1 = run(nl, micro_pipeline(2), waves)
    t2 = run(nl, micro_pipeline(2), waves)
    assert all((x == y).all() for x, y in zip(t1.snapshots, t2.snapshots))


def test_trace_csv(tmp_path):
    nl, _ = two_stage_xor()
    trace = run(nl, micro_pipeline(2), [{"a": 1, "b": 0}], watch=["x"])
    path = tmp_path / "t.csv"
    trace.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "slot,net,value"
    assert lines[1] == "0,x,Z"


def test_missing_input_value():
    nl = single_stage([["a", "b"]])
    sim = Simulator(nl, micro_pipeline(1))
    with pytest.raises(KeyError):
        sim.set_inputs({"a": 1})


def test_stack_delay_examples():
    assert stack_delay(1, 1e3, 4e-15, 1e-16) == pytest.approx(1e3 * (1e-16 + 4e-15))
    ys = [stack_delay(m, 1e3, 4e-15, 0.0) for m in range(1, 10)]
    assert np.diff(ys) == pytest.approx([ys[0]] * 8)
    with pytest.raises(ValueError):
        stack_delay(0, 1, 1, 1)


def test_stack_delay_near_linear(bundle):
    drv = bundle.drivers["skybridge"]
    ys = [stack_delay(m, drv.r0, 4 * drv.c0, drv.cp) for m in range(1, 10)]
    assert linear_fit_r2(range(1, 10), ys) >= 0.98


def test_charge_share():
    assert charge_share(0.8, 1.0, 0.0) == 0.8
    assert charge_share(0.8, 1.0, 0.379) == pytest.approx(0.58, abs=5e-3)
    assert charge_share(0.8, 2.0, 0.379) > charge_share(0.8, 1.0, 0.379)
    with pytest.raises(ValueError):
        charge_share(0.8, -1.0, 0.1)


def test_netlist_round_trip():
    nl, _ = two_stage_xor()
    text = nlio.dumps(nl)
    again = nlio.loads(text)
    assert nlio.dumps(again) == text
    assert again.stats() == nl.stats()


def test_netlist_rejects_bad_structure():
    nl = Netlist()
    nl.add_input("a")
    with pytest.raises(NetlistError, match="fan-in"):
        nl.add_gate("y", 0, [["a"] * 10])
    with pytest.raises(NetlistError, match="unknown net"):
        nl.add_gate("z", 0, [["nope"]])
    nl.add_gate("y0", 0, [["a"]])
    nl.add_gate("y1", 1, [["y0"]])
    nl.add_gate("back", 0, [["y1"]])
    with pytest.raises(NetlistError, match="feed back"):
        nl.validate()
    with pytest.raises(NetlistError):
        nlio.loads("gate y 0 missing\n")


def test_builder_fan_in_limit():
    b = Builder(max_fan_in=3)
    xs = b.inputs("x", 4)
    with pytest.raises(FanInError):
        b.and_(*xs, stage=0)


def test_builder_buffers_are_shared():
    b = Builder()
    a = b.input("a")
    assert b.at(a, 2) == b.at(a, 2)
    assert b.at(~a, 2) == ~b.at(a, 2)
    with pytest.raises(NetlistError):
        b.at(b.at(a, 2), 1)


def covers(imp, m):
    v, mask = imp
    return (m & ~mask) == v


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, 2**n - 1)))))
def test_cover_reproduces_function(case):
    n, ones = case
    chosen = cover(ones, n)
    for m in range(2**n):
        assert any(covers(p, m) for p in chosen) == (m in ones)
    primes = set(prime_implicants(ones, n))
    assert set(chosen) <= primes


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, 2 ** (2**n) - 2))))
def test_builder_function_matches_truth_table(case):
    n, table = case
    b = Builder()
    xs = b.inputs("x", n)
    y = b.function("y", xs, lambda *v: (table >> sum(bit << k for k, bit in enumerate(v))) & 1, 0)
    b.output(y)
    m = np.arange(2**n)
    bits = int_to_bits(m, n)
    sim = eval_once(b.nl, **{f"x{k}": bits[k] for k in range(n)})
    got = bits_to_int([sim.values[b.nl.net(y.t)]])
    np.testing.assert_array_equal(got, (table >> m) & 1)
    np.testing.assert_array_equal(sim.values[b.nl.net(y.f)], ~sim.values[b.nl.net(y.t)])
