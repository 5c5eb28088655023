"""Placement of dynamic NAND netlists onto the vertical-nanowire grid and area estimates.

The placement unit is a NAND term (one transistor stack).  Logic nanowires
hold ``gates_per_nanowire`` stacks.  Signal nanowires are sized either by
routed nets (``signal_model="nets"``: every gate output is a net, each
signal nanowire carries ``signals_per_nanowire`` of them next to its
shield) or as a fixed logic:signal ratio (``"ratio"``).  The block is
surrounded by a ring of power-pillar sites.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .dynlogic.netlist import Netlist
from .params import DesignRules

LOGIC, SIGNAL, HDPP, EMPTY = "logic", "signal", "hdpp", "empty"


class FanInError(ValueError):
    pass


@dataclass
class LayoutPlan:
    grid: list[list[str]]
    assignments: list[list[int]]  # per logic nanowire: indices into the term list
    footprint: tuple[int, int]  # (x, y) in nanowire pitches
    overhead_factor: float = 1.0
    n_terms: int = 0
    meta: dict = field(default_factory=dict)

    def count(self, kind: str) -> int:
        return sum(row.count(kind) for row in self.grid)

    @property
    def placed(self) -> int:
        return sum(len(a) for a in self.assignments)

    def summary(self) -> dict[str, float]:
        return {
            "terms": self.n_terms,
            "logic_nanowires": self.count(LOGIC),
            "signal_nanowires": self.count(SIGNAL),
            "hdpp_sites": self.count(HDPP),
            "empty_sites": self.count(EMPTY),
            "x_pitches": self.footprint[0],
            "y_pitches": self.footprint[1],
        }

    def dump_grid(self) -> str:
        sym = {LOGIC: "L", SIGNAL: "S", HDPP: "H", EMPTY: "."}
        return "\n".join("".join(sym[c] for c in row) for row in self.grid) + ("\n" if self.grid else "")


def gates_per_nanowire(rules: DesignRules) -> int:
    return rules.gates_per_nanowire


def _ordered_terms(nl: Netlist) -> list[tuple[int, int]]:
    """(gate index, term index) pairs, grouped by stage then gate so related stacks sit together."""
    order = sorted(range(len(nl.gates)), key=lambda g: (nl.gates[g].stage, g))
    return [(g, t) for g in order for t in range(len(nl.gates[g].terms))]


def place(nl: Netlist | None, rules: DesignRules) -> LayoutPlan:
    terms = _ordered_terms(nl) if nl is not None else []
    if nl is not None:
        for g in nl.gates:
            if g.fan_in > rules.max_fan_in:
                raise FanInError(
                    f"gate {nl.nets[g.output]!r} has fan-in {g.fan_in} > {rules.max_fan_in} usable inputs"
                )
    n = len(terms)
    if n == 0:
        return LayoutPlan([], [], (0, 0), rules.overhead_factor, 0)
    per = gates_per_nanowire(rules)
    n_logic = math.ceil(n / per)
    if rules.signal_model == "nets":
        n_signal = math.ceil(len(nl.gates) / rules.signals_per_nanowire)
    else:
        n_signal = math.ceil(n_logic / rules.logic_per_signal)
    assignments = [list(range(i, min(n, i + per))) for i in range(0, n, per)]

    core = n_logic + n_signal
    x = math.ceil(math.sqrt(core))
    y = math.ceil(core / x)
    # interleave: spread signal sites evenly through the logic sequence
    seq = []
    placed_sig = 0
    for k in range(n_logic):
        seq.append(LOGIC)
        want = math.floor((k + 1) * n_signal / n_logic)
        while placed_sig < want:
            seq.append(SIGNAL)
            placed_sig += 1
    seq += [SIGNAL] * (n_signal - placed_sig)
    seq += [EMPTY] * (x * y - len(seq))

    h = rules.hdpp_size
    X, Y = x + 2 * h, y + 2 * h
    grid = [[EMPTY] * X for _ in range(Y)]
    for k, kind in enumerate(seq):
        r, c = divmod(k, x)
        grid[h + r][h + (c if r % 2 == 0 else x - 1 - c)] = kind  # serpentine keeps neighbours adjacent
    for (r, c) in _ring_sites(X, Y, h, rules.hdpp_every):
        for dr in range(h):
            for dc in range(h):
                if 0 <= r + dr < Y and 0 <= c + dc < X:
                    grid[r + dr][c + dc] = HDPP
    return LayoutPlan(grid, assignments, (X, Y), rules.overhead_factor, n,
                      {"gates_per_nanowire": per, "core": (x, y)})


def _ring_sites(X: int, Y: int, h: int, every: int) -> list[tuple[int, int]]:
    """Top-left corners of pillars along the periphery, ``every`` pitches apart."""
    sites = set()
    for c in range(0, X - h + 1, every):
        sites.add((0, c))
        sites.add((Y - h, c))
    for r in range(0, Y - h + 1, every):
        sites.add((r, 0))
        sites.add((r, X - h))
    sites.add((Y - h, X - h))
    return sorted(sites)


def raw_area(plan: LayoutPlan, rules: DesignRules) -> float:
    """Footprint in um^2 without the overhead factor."""
    x, y = plan.footprint
    return x * rules.nanowire_pitch * y * rules.nanowire_pitch * 1e-6


def area(plan: LayoutPlan, rules: DesignRules) -> float:
    return raw_area(plan, rules) * plan.overhead_factor


def calibrate(nl: Netlist, rules: DesignRules, target_um2: float) -> DesignRules:
    """Rules whose overhead factor makes ``nl`` occupy ``target_um2``."""
    plan = place(nl, replace(rules, overhead_factor=1.0))
    return replace(rules, overhead_factor=target_um2 / raw_area(plan, rules))


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    pitch: float
    gates_per_nanowire: int
    logic_nanowires: int
    area: float  # re-placed, pitch^2 geometry
    area_linear: float  # baseline area scaled linearly with pitch
    ratio: float
    ratio_linear: float


def rules_for(rules: DesignRules, axis: str, value: float) -> DesignRules:
    if value <= 0:
        raise ValueError("sweep values must be > 0")
    if axis == "spacing":
        extra = rules.nanowire_pitch - rules.nanowire_width - rules.spacing
        return replace(rules, spacing=value, nanowire_pitch=rules.nanowire_width + value + extra)
    if axis == "feature_size":
        f = value / rules.nanowire_width
        return replace(rules, nanowire_width=value, spacing=rules.spacing * f, nanowire_pitch=rules.nanowire_pitch * f)
    if axis == "aspect_ratio":
        # value is height/width; gates per nanowire follow from the height
        return replace(rules, nanowire_height=value * rules.nanowire_width)
    raise ValueError(f"unknown sweep axis {axis!r}")


def sensitivity_sweep(nl: Netlist, rules: DesignRules, axis: str, values) -> list[SweepRow]:
    base_plan = place(nl, rules)
    base = area(base_plan, rules)
    rows = []
    for v in values:
        r = rules_for(rules, axis, float(v))
        plan = place(nl, r)
        a = area(plan, r)
        lin = base * r.nanowire_pitch / rules.nanowire_pitch * raw_area(plan, rules) / raw_area(base_plan, rules)
        rows.append(SweepRow(axis, float(v), r.nanowire_pitch, r.gates_per_nanowire, plan.count(LOGIC), a, lin,
                             a / base if base else 0.0, lin / base if base else 0.0))
    return rows
