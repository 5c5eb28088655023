from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..dynlogic.builder import Builder, Sig
from ..dynlogic.netlist import Netlist
from ..dynlogic.sim import PhaseSchedule, Simulator, bits_to_int, int_to_bits, micro_pipeline, run


@dataclass
class Design:
    """A generated netlist with named little-endian input and output buses."""

    nl: Netlist
    inputs: dict[str, list[Sig]] = field(default_factory=dict)
    outputs: dict[str, list[Sig]] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def out_stage(self) -> int:
        return max(s.stage for bus in self.outputs.values() for s in bus)

    def schedule(self) -> PhaseSchedule:
        return micro_pipeline(self.nl.n_stages)


def finish(b: Builder, inputs, outputs, **meta) -> Design:
    """Align every output to the last output stage and register it."""
    last = max(s.stage for bus in outputs.values() for s in bus)
    aligned = {}
    for name, bus in outputs.items():
        aligned[name] = [b.at(s, last) for s in bus]
        for s in aligned[name]:
            b.output(s)
    return Design(b.nl, inputs, aligned, dict(meta))


def _input_map(design: Design, values: Mapping[str, object]) -> dict[str, np.ndarray]:
    out = {}
    for name, bus in design.inputs.items():
        bits = int_to_bits(np.atleast_1d(values[name]), len(bus))
        for sig, bit in zip(bus, bits):
            out[sig.t] = bit
    return out


def evaluate(design: Design, values: Mapping[str, object]) -> dict[str, np.ndarray]:
    """Evaluate one wave on many lanes at once; returns output buses as integers."""
    lanes = len(np.atleast_1d(next(iter(values.values()))))
    sch = design.schedule()
    sim = Simulator(design.nl, sch, lanes)
    sim.set_inputs(_input_map(design, values))
    slot_hold = sch.hold_slot(design.out_stage, 0)
    for _ in range(slot_hold + 1):
        sim.step()
    result = {}
    for name, bus in design.outputs.items():
        idx = [design.nl.net(s.t) for s in bus]
        if sim.floating[idx].any():
            raise RuntimeError(f"output {name} not valid at its hold slot")
        result[name] = bits_to_int([sim.values[i] for i in idx])
    return result


def evaluate_stream(design: Design, waves: list[Mapping[str, int]]) -> list[dict[str, int]]:
    """Feed one wave per clock cycle and collect the outputs of every wave in order."""
    stream = [{k: bool(v) for k, v in _input_map(design, w).items()} for w in waves]
    trace = run(design.nl, design.schedule(), stream)
    results: list[dict[str, int]] = [{} for _ in waves]
    for name, bus in design.outputs.items():
        per_bit = [trace.samples(s.t) for s in bus]
        for k in range(len(waves)):
            bits = [int(ev[k][1][0]) for ev in per_bit]
            results[k][name] = sum(b << i for i, b in enumerate(bits))
    return results


def latency_cycles(design: Design) -> int:
    """Cycles from applying a wave to its outputs entering HOLD."""
    sch = design.schedule()
    return sch.hold_slot(design.out_stage, 0) // sch.cycle + 1

