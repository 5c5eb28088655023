"""Volatile memory cell made of two cross-coupled dynamic NAND gates and a read term.

Stage 0 (x) drives ``out``, stage 1 (y) drives ``nout`` and stage 2 drives the
bit line ``bl``.  A write runs x-precharge, x-evaluate, y-precharge,
y-evaluate; a read precharges and evaluates only the bit-line stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..dynlogic.netlist import Netlist
from ..dynlogic.sim import EVA, HOLD, PRE, PhaseSchedule, Simulator, table_schedule

X, Y, R = 0, 1, 2


class ProtocolError(RuntimeError):
    pass


def gen_nwram() -> Netlist:
    nl = Netlist()
    for name in ("w", "d", "read"):
        nl.add_input(name)
        nl.add_input(name + "_n", complement_of=name)
    nl.forward("nout")
    # out = NAND(w, d_n) AND NAND(w_n, nout): writes d when w, else keeps ~nout
    nl.add_gate("out", X, [["w", "d_n"], ["w_n", "nout"]])
    nl.add_gate("nout", Y, [["out"]])
    nl.add_gate("bl", R, [["read", "nout"]])
    nl.declare_feedback("nout")
    nl.add_output("bl")
    nl.validate()
    return nl


OPS = {
    "write": [{X: PRE}, {X: EVA}, {Y: PRE}, {Y: EVA}],
    "read": [{R: PRE}, {R: EVA}, {}],
    "idle": [{}],
}


def check_protocol(rows) -> None:
    """Reject schedules whose x and y windows overlap or that skip a precharge."""
    last = {X: HOLD, Y: HOLD, R: HOLD}
    for k, row in enumerate(rows):
        active = [s for s in (X, Y) if row.get(s, HOLD) != HOLD]
        if len(active) > 1:
            raise ProtocolError(f"row {k}: x and y write windows overlap")
        for s, ph in row.items():
            if ph == EVA and last[s] != PRE:
                raise ProtocolError(f"row {k}: stage {s} evaluates without precharge")
        for s in last:
            last[s] = row.get(s, HOLD)


@dataclass
class NwramCell:
    """Protocol driver holding a simulator for one cell."""

    state: int = 0
    nl: Netlist = field(default_factory=gen_nwram)
    log: list[tuple[str, int, int, int | None]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._rows: list[dict] = []
        self._sim: Simulator | None = None
        self._boot(self.state)

    def _boot(self, state: int) -> None:
        sch = PhaseSchedule(3, 1, table=({},))
        self._sim = Simulator(self.nl, sch, 1, initial={"out": state, "nout": 1 - state, "bl": 1})

    def _run(self, rows, inputs) -> None:
        check_protocol(rows)
        sim = self._sim
        sim.schedule = table_schedule(3, rows)
        sim.slot = 0
        sim.set_inputs(inputs)
        for _ in rows:
            sim.step()

    def value(self, net: str) -> int:
        i = self.nl.net(net)
        if self._sim.floating[i]:
            raise ProtocolError(f"{net} is floating")
        return int(self._sim.values[i, 0])

    def write(self, bit: int) -> None:
        self._run(OPS["write"], {"w": 1, "d": bit, "read": 0})
        self.log.append(("write", self.value("out"), self.value("nout"), None))

    def read(self) -> int:
        self._run(OPS["read"], {"w": 0, "d": 0, "read": 1})
        bl = self.value("bl")
        self.log.append(("read", self.value("out"), self.value("nout"), bl))
        return bl

    def refresh(self) -> None:
        """Clock the write pair with write disabled; the stored value is regenerated."""
        self._run(OPS["write"], {"w": 0, "d": 0, "read": 0})
        self.log.append(("refresh", self.value("out"), self.value("nout"), None))

    def power_cycle(self) -> None:
        """Clocks off then on: the retained state is restored without read-back."""
        self._boot(self.value("out"))
        self.log.append(("restore", self.value("out"), self.value("nout"), None))

    @property
    def stored(self) -> tuple[int, int]:
        return self.value("out"), self.value("nout")
