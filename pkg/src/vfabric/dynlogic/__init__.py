"""Clocked dynamic NAND logic: netlists, phase schedules and simulation."""
from .builder import Builder, FanInError, Lit, Sig
from .electrical import charge_share, stack_delay
from .netlist import CompoundGate, Latch, NandTerm, Netlist, NetlistError
from .sim import (
    EVA,
    FLOATING,
    HOLD,
    IDLE,
    PRE,
    PhaseSchedule,
    ReadFloatingError,
    Simulator,
    SimTrace,
    micro_pipeline,
    run,
    table_schedule,
)

__all__ = [
    "Builder", "FanInError", "Lit", "Sig", "charge_share", "stack_delay",
    "CompoundGate", "Latch", "NandTerm", "Netlist", "NetlistError",
    "EVA", "FLOATING", "HOLD", "IDLE", "PRE", "PhaseSchedule", "ReadFloatingError",
    "Simulator", "SimTrace", "micro_pipeline", "run", "table_schedule",
]
