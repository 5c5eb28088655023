"""Phase-accurate Boolean simulation of dynamic NAND netlists.

Values are simulated for many independent lanes at once (one numpy column
per lane); every lane shares the clock schedule, so whether a net is
readable is a property of the slot, not of the lane.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .netlist import RAILS, Netlist

PRE, EVA, HOLD, IDLE = "PRE", "EVA", "HOLD", "IDLE"
FLOATING = 2


class ReadFloatingError(RuntimeError):
    """An evaluating stage read a net that was neither held nor driven."""


@dataclass(frozen=True)
class PhaseSchedule:
    """Phase of every stage in every slot.

    ``sequence`` is the per-stage phase pattern over one cycle and stage
    ``s`` starts ``offsets[s]`` slots late.  Before its start a stage is
    IDLE, or HOLD at logic 0 when ``reset_hold`` is set (power-on state used
    by designs with latch feedback).  ``table`` overrides everything with an
    explicit list of {stage: phase} dicts; unlisted stages HOLD.
    """

    n_stages: int
    cycle: int
    sequence: tuple[str, ...] = ()
    offsets: tuple[int, ...] = ()
    rail: str = "dual"
    reset_hold: bool = False
    table: tuple[Mapping[int, str], ...] | None = None

    def phase(self, stage: int, slot: int) -> str:
        if self.table is not None:
            row = self.table[slot % len(self.table)]
            return row.get(stage, HOLD)
        t = slot - self.offsets[stage]
        if t < 0:
            return HOLD if self.reset_hold else IDLE
        return self.sequence[t % self.cycle]

    def eval_slot(self, stage: int, wave: int) -> int:
        """Slot in which ``stage`` evaluates the data of ``wave``."""
        return wave * self.cycle + self.offsets[stage] + self.sequence.index(EVA)

    def hold_slot(self, stage: int, wave: int) -> int:
        return wave * self.cycle + self.offsets[stage] + self.sequence.index(HOLD)

    @property
    def length(self) -> int:
        return len(self.table) if self.table is not None else self.cycle


def micro_pipeline(n_stages: int, rail: str = "dual", reset_hold: bool = False) -> PhaseSchedule:
    """Overlapped PRE/EVA/HOLD clocking; a new wave enters every cycle.

    Dual-rail: 3-slot cycle, each stage one slot behind its producer.
    Single-rail: 6-slot cycle (two overlapped 3-phase sequences), stages
    two slots apart so the inverting stage has time to follow.
    """
    if rail == "dual":
        return PhaseSchedule(n_stages, 3, (PRE, EVA, HOLD), tuple(range(n_stages)), rail, reset_hold)
    if rail == "single":
        seq = (PRE, EVA, HOLD, HOLD, HOLD, HOLD)
        return PhaseSchedule(n_stages, 6, seq, tuple(2 * s for s in range(n_stages)), rail, reset_hold)
    raise ValueError("rail must be dual or single")


def table_schedule(n_stages: int, rows: Sequence[Mapping[int, str]]) -> PhaseSchedule:
    return PhaseSchedule(n_stages, len(rows), table=tuple(dict(r) for r in rows))


@dataclass
class SimTrace:
    nets: list[str]
    snapshots: list[np.ndarray] = field(default_factory=list)  # per slot, (watched, lanes) int8
    events: dict[str, list[tuple[int, np.ndarray]]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.snapshots)

    def value(self, net: str, slot: int, lane: int = 0) -> int:
        return int(self.snapshots[slot][self.nets.index(net), lane])

    def samples(self, net: str) -> list[tuple[int, np.ndarray]]:
        return self.events.get(net, [])

    def write_csv(self, path, lane: int = 0) -> None:
        with open(path, "w", newline="") as fh:
            self.write_rows(csv.writer(fh), lane)

    def write_rows(self, writer, lane: int = 0) -> None:
        writer.writerow(["slot", "net", "value"])
        for slot, snap in enumerate(self.snapshots):
            for k, name in enumerate(self.nets):
                v = int(snap[k, lane])
                writer.writerow([slot, name, "Z" if v == FLOATING else v])


class _StagePlan:
    def __init__(self, nl: Netlist, stage: int, producers: dict[int, int]):
        gates = [g for g in nl.gates if g.stage == stage]
        self.outputs = np.array([g.output for g in gates], dtype=np.int64)
        width = max((len(t) for g in gates for t in g.terms), default=1)
        rows, starts = [], []
        vdd = nl.net("vdd")
        for g in gates:
            starts.append(len(rows))
            for t in g.terms:
                rows.append(list(t) + [vdd] * (width - len(t)))
        self.index = np.array(rows, dtype=np.int64).reshape(len(rows), width) if rows else None
        self.starts = np.array(starts, dtype=np.int64)
        self.latches = [la for la in nl.latches if la.stage == stage]
        reads: dict[int, int] = {}
        for g in gates:
            for t in g.terms:
                for i in t:
                    if i in producers:
                        reads[i] = producers[i]
        for la in self.latches:
            for i in (la.select, la.data):
                if i in producers:
                    reads[i] = producers[i]
        self.reads = reads
        self.out_nets = [int(o) for o in self.outputs] + [la.output for la in self.latches] + [
            la.output_n for la in self.latches if la.output_n is not None
        ]


class Simulator:
    def __init__(self, nl: Netlist, schedule: PhaseSchedule, lanes: int = 1,
                 initial: Mapping[str, int] | None = None):
        nl.validate()
        if schedule.n_stages < nl.n_stages:
            raise ValueError("schedule has fewer stages than the netlist")
        self.nl = nl
        self.schedule = schedule
        self.lanes = lanes
        producers = nl._producers()
        self.plans = [_StagePlan(nl, s, producers) for s in range(nl.n_stages)]
        self.values = np.zeros((len(nl.nets), lanes), dtype=bool)
        self.floating = np.zeros(len(nl.nets), dtype=bool)
        for s in range(nl.n_stages):
            if schedule.phase(s, 0) == IDLE or not schedule.reset_hold:
                for o in self.plans[s].out_nets:
                    self.floating[o] = True
        for name, v in RAILS.items():
            self.values[nl.net(name)] = bool(v)
        self.state = {la.output: np.full(lanes, bool(la.init)) for la in nl.latches}
        if schedule.reset_hold:
            for la in nl.latches:
                self._drive_latch(la)
        for name, v in (initial or {}).items():
            i = nl.net(name)
            self.values[i] = bool(v)
            self.floating[i] = False
        self.slot = 0

    def _drive_latch(self, la) -> None:
        st = self.state[la.output]
        self.values[la.output] = st
        if la.output_n is not None:
            self.values[la.output_n] = ~st

    def set_inputs(self, inputs: Mapping[str, object]) -> None:
        nl = self.nl
        given = {nl.net(k): np.broadcast_to(np.asarray(v, dtype=bool), (self.lanes,)) for k, v in inputs.items()}
        for i in nl.inputs:
            if i in given:
                self.values[i] = given[i]
            elif i in nl.complements and nl.complements[i] in given:
                self.values[i] = ~given[nl.complements[i]]
            else:
                raise KeyError(f"no value for primary input {nl.nets[i]!r}")

    def step(self, inputs: Mapping[str, object] | None = None) -> None:
        """Advance one slot; ``inputs`` (if given) are applied first."""
        if inputs is not None:
            self.set_inputs(inputs)
        slot = self.slot
        sch = self.schedule
        phases = [sch.phase(s, slot) for s in range(self.nl.n_stages)]
        evaluating = [s for s, p in enumerate(phases) if p == EVA]
        # all reads happen against the values held at the start of the slot
        results = []
        for s in evaluating:
            plan = self.plans[s]
            for net, src in plan.reads.items():
                if phases[src] != HOLD or self.floating[net]:
                    raise ReadFloatingError(
                        f"slot {slot}: stage {s} evaluates while {self.nl.nets[net]!r} "
                        f"(stage {src}) is {phases[src] if phases[src] != HOLD else 'floating'}"
                    )
            out = None
            if plan.index is not None:
                terms = ~np.all(self.values[plan.index], axis=1)
                out = np.logical_and.reduceat(terms, plan.starts, axis=0)
            lat = []
            for la in plan.latches:
                sel = self.values[la.select]
                new = np.where(sel, self.values[la.data], self.state[la.output])
                lat.append((la, new))
            results.append((s, out, lat))
        for s, p in enumerate(phases):
            plan = self.plans[s]
            if p == PRE:
                for o in plan.out_nets:
                    self.values[o] = False
                    self.floating[o] = True  # precharged, not yet a result
            elif p == IDLE:
                for o in plan.out_nets:
                    self.floating[o] = True
        for s, out, lat in results:
            plan = self.plans[s]
            if out is not None:
                self.values[plan.outputs] = out
                self.floating[plan.outputs] = False
            for la, new in lat:
                self.state[la.output] = new
                self._drive_latch(la)
                self.floating[la.output] = False
                if la.output_n is not None:
                    self.floating[la.output_n] = False
        self.slot += 1

    def snapshot(self, nets: Sequence[int]) -> np.ndarray:
        snap = self.values[nets].astype(np.int8)
        snap[self.floating[nets]] = FLOATING
        return snap


def run(
    nl: Netlist,
    schedule: PhaseSchedule,
    input_stream: Sequence[Mapping[str, object]],
    slots: int | None = None,
    lanes: int = 1,
    watch: Iterable[str] | None = None,
    on_slot: Callable[[Simulator], None] | None = None,
) -> SimTrace:
    """Simulate; ``input_stream[k]`` is applied from the start of cycle ``k``.

    Inputs stay at their last value once the stream is exhausted.  An
    output event is recorded each time the output's stage enters HOLD.
    """
    sim = Simulator(nl, schedule, lanes)
    if slots is None:
        slots = len(input_stream) * schedule.length + _fill_slots(nl, schedule)
    watch_idx = [nl.net(n) for n in watch] if watch is not None else list(range(len(nl.nets)))
    trace = SimTrace([nl.nets[i] for i in watch_idx])
    outs = [(nl.nets[o], o, nl.producer_stage(o)) for o in nl.outputs]
    for name, *_ in outs:
        trace.events[name] = []
    cyc = schedule.length
    for slot in range(slots):
        k = slot // cyc
        inputs = None
        if slot % cyc == 0 and input_stream:
            inputs = input_stream[min(k, len(input_stream) - 1)]
        sim.step(inputs)
        trace.snapshots.append(sim.snapshot(watch_idx))
        for name, o, st in outs:
            if st is None:
                continue
            now = schedule.phase(st, slot)
            if slot > 0:
                before = schedule.phase(st, slot - 1)
            else:
                before = HOLD if schedule.reset_hold else IDLE
            if now == HOLD and before != HOLD and not sim.floating[o]:
                trace.events[name].append((slot, sim.values[o].copy()))
        if on_slot is not None:
            on_slot(sim)
    return trace


def _fill_slots(nl: Netlist, schedule: PhaseSchedule) -> int:
    if schedule.table is not None:
        return 0
    last = nl.n_stages - 1
    return schedule.offsets[last] + schedule.sequence.index(HOLD) + 1


def bits_to_int(bits: Sequence[np.ndarray]) -> np.ndarray:
    """Little-endian bit arrays (one per bit, lanes wide) to integers."""
    out = np.zeros(np.asarray(bits[0]).shape, dtype=np.int64)
    for k, b in enumerate(bits):
        out |= np.asarray(b, dtype=np.int64) << k
    return out


def int_to_bits(values: np.ndarray, width: int) -> list[np.ndarray]:
    values = np.asarray(values, dtype=np.int64)
    return [((values >> k) & 1).astype(bool) for k in range(width)]
