"""Netlist model for clocked dynamic NAND logic and its line-oriented text format.

Text format, one record per line (``#`` starts a comment)::

    stages 4
    input a a_n b b_n
    complement a_n a
    output s s_n
    gate s 3 a,b a_n,b_n          # s = NAND(a,b) AND NAND(a_n,b_n)
    latch q q_n 2 sel d 0         # out, complement (or -), stage, select, data, initial state
    feedback q                    # q may be read by its own or earlier stages

``vdd`` and ``gnd`` are predeclared constant rails.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

MAX_TERM_FAN_IN = 9
RAILS = {"vdd": 1, "gnd": 0}


class NetlistError(ValueError):
    pass


@dataclass(frozen=True)
class NandTerm:
    inputs: tuple[int, ...]
    stage: int
    output: int


@dataclass(frozen=True)
class CompoundGate:
    """AND of NAND terms sharing one output net; a single term is a plain NAND."""

    output: int
    stage: int
    terms: tuple[tuple[int, ...], ...]

    @property
    def fan_in(self) -> int:
        return max(len(t) for t in self.terms)


@dataclass(frozen=True)
class Latch:
    """Select/data latch: on evaluation, state <- data if select else state."""

    output: int
    output_n: int | None
    stage: int
    select: int
    data: int
    init: int = 0


@dataclass
class Netlist:
    n_stages: int = 0
    nets: list[str] = field(default_factory=list)
    kinds: list[str] = field(default_factory=list)
    gates: list[CompoundGate] = field(default_factory=list)
    latches: list[Latch] = field(default_factory=list)
    inputs: list[int] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    complements: dict[int, int] = field(default_factory=dict)
    feedback: set[int] = field(default_factory=set)
    meta: dict = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.nets:
            for name in RAILS:
                self._new(name, "rail")

    def forward(self, name: str) -> int:
        """Reserve a net that a later add_gate/add_latch will define (for feedback)."""
        if name in self._index:
            return self._index[name]
        idx = self._new(name, "forward")
        self.meta.setdefault("forward", set()).add(name)
        return idx

    def _new(self, name: str, kind: str) -> int:
        fwd = self.meta.get("forward", set())
        if name in fwd:
            fwd.discard(name)
            idx = self._index[name]
            self.kinds[idx] = kind
            return idx
        if name in self._index:
            raise NetlistError(f"net {name!r} already defined")
        if not name or any(ch in name for ch in " ,#\t"):
            raise NetlistError(f"bad net name {name!r}")
        self.nets.append(name)
        self.kinds.append(kind)
        self._index[name] = len(self.nets) - 1
        return len(self.nets) - 1

    def net(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise NetlistError(f"unknown net {name!r}") from None

    def has_net(self, name: str) -> bool:
        return name in self._index

    def add_input(self, name: str, complement_of: str | None = None) -> int:
        idx = self._new(name, "input")
        self.inputs.append(idx)
        if complement_of is not None:
            self.complements[idx] = self.net(complement_of)
        return idx

    def add_gate(self, output: str, stage: int, terms: Sequence[Sequence[str]]) -> int:
        if not terms:
            raise NetlistError(f"gate {output!r} has no terms")
        idx = self._new(output, "gate")
        tt = []
        for t in terms:
            if not 1 <= len(t) <= MAX_TERM_FAN_IN:
                raise NetlistError(f"gate {output!r}: term fan-in {len(t)} outside [1, {MAX_TERM_FAN_IN}]")
            tt.append(tuple(self.net(n) for n in t))
        self.gates.append(CompoundGate(idx, stage, tuple(tt)))
        self.n_stages = max(self.n_stages, stage + 1)
        return idx

    def add_latch(self, output: str, output_n: str | None, stage: int, select: str, data: str, init: int = 0) -> int:
        idx = self._new(output, "latch")
        idx_n = self._new(output_n, "latch") if output_n else None
        # select/data may be declared later (feedback); resolved by connect_latch
        sel = self._index.get(select, -1)
        dat = self._index.get(data, -1)
        self.latches.append(Latch(idx, idx_n, stage, sel, dat, int(init)))
        self.meta.setdefault("pending", {})[idx] = (select, data)
        self.n_stages = max(self.n_stages, stage + 1)
        return idx

    def connect_latch(self, output: str, select: str | None = None, data: str | None = None) -> None:
        out = self.net(output)
        for k, la in enumerate(self.latches):
            if la.output == out:
                sel = self.net(select) if select else la.select
                dat = self.net(data) if data else la.data
                self.latches[k] = Latch(la.output, la.output_n, la.stage, sel, dat, la.init)
                return
        raise NetlistError(f"{output!r} is not a latch output")

    def declare_feedback(self, name: str) -> None:
        """Allow ``name`` to be read by gates of its own or earlier stages."""
        self.feedback.add(self.net(name))

    def add_output(self, name: str) -> None:
        self.outputs.append(self.net(name))

    # ---- queries
    def producer_stage(self, net: int) -> int | None:
        """Stage that drives ``net``; None for inputs and rails."""
        return self._producers().get(net)

    def _producers(self) -> dict[int, int]:
        prod = {}
        for g in self.gates:
            prod[g.output] = g.stage
        for la in self.latches:
            prod[la.output] = la.stage
            if la.output_n is not None:
                prod[la.output_n] = la.stage
        return prod

    def terms(self) -> list[NandTerm]:
        return [NandTerm(t, g.stage, g.output) for g in self.gates for t in g.terms]

    def validate(self) -> None:
        undefined = self.meta.get("forward")
        if undefined:
            raise NetlistError(f"nets declared but never driven: {sorted(undefined)}")
        for la in self.latches:
            if la.select < 0 or la.data < 0:
                raise NetlistError(f"latch {self.nets[la.output]!r} has unconnected select/data")
        prod = self._producers()
        for g in self.gates:
            for t in g.terms:
                for i in t:
                    s = prod.get(i)
                    if s is not None and s >= g.stage and i not in self.feedback:
                        raise NetlistError(
                            f"gate {self.nets[g.output]!r} (stage {g.stage}) reads {self.nets[i]!r} "
                            f"from stage {s}; only latch inputs may feed back"
                        )

    def stats(self) -> dict[str, int]:
        return {
            "nets": len(self.nets),
            "gates": len(self.gates),
            "terms": sum(len(g.terms) for g in self.gates),
            "latches": len(self.latches),
            "stages": self.n_stages,
            "max_fan_in": max((g.fan_in for g in self.gates), default=0),
        }


def dumps(nl: Netlist) -> str:
    lines = [f"stages {nl.n_stages}"]
    comp = nl.complements
    plain = [nl.nets[i] for i in nl.inputs if i not in comp]
    if plain:
        lines.append("input " + " ".join(plain))
    for i in nl.inputs:
        if i in comp:
            lines.append(f"input {nl.nets[i]}")
            lines.append(f"complement {nl.nets[i]} {nl.nets[comp[i]]}")
    for g in nl.gates:
        terms = " ".join(",".join(nl.nets[i] for i in t) for t in g.terms)
        lines.append(f"gate {nl.nets[g.output]} {g.stage} {terms}")
    for la in nl.latches:
        neg = nl.nets[la.output_n] if la.output_n is not None else "-"
        lines.append(f"latch {nl.nets[la.output]} {neg} {la.stage} {nl.nets[la.select]} {nl.nets[la.data]} {la.init}")
    if nl.feedback:
        lines.append("feedback " + " ".join(nl.nets[i] for i in sorted(nl.feedback)))
    if nl.outputs:
        lines.append("output " + " ".join(nl.nets[i] for i in nl.outputs))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Netlist:
    nl = Netlist()
    pending_outputs: list[str] = []
    pending_feedback: list[str] = []
    declared_stages = 0
    records = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            records.append((lineno, line))
    # gate and latch outputs may be referenced before their defining line
    for lineno, line in records:
        head, *rest = line.split()
        if head in ("gate", "latch") and rest:
            try:
                nl.forward(rest[0])
                if head == "latch" and len(rest) > 1 and rest[1] != "-":
                    nl.forward(rest[1])
            except NetlistError as exc:
                raise NetlistError(f"line {lineno}: {exc}") from None
    for lineno, line in records:
        head, *rest = line.split()
        try:
            if head == "stages":
                declared_stages = int(rest[0])
            elif head == "input":
                for name in rest:
                    nl.add_input(name)
            elif head == "complement":
                neg, pos = rest
                nl.complements[nl.net(neg)] = nl.net(pos)
            elif head == "output":
                pending_outputs.extend(rest)
            elif head == "feedback":
                pending_feedback.extend(rest)
            elif head == "gate":
                out, stage, *terms = rest
                nl.add_gate(out, int(stage), [t.split(",") for t in terms])
            elif head == "latch":
                out, neg, stage, sel, dat, *init = rest
                nl.add_latch(out, None if neg == "-" else neg, int(stage), sel, dat, int(init[0]) if init else 0)
            else:
                raise NetlistError(f"unknown record {head!r}")
        except (ValueError, IndexError) as exc:
            raise NetlistError(f"line {lineno}: {exc}") from None
    for la in list(nl.latches):
        sel, dat = nl.meta.get("pending", {}).get(la.output, (None, None))
        nl.connect_latch(nl.nets[la.output], sel, dat)
    for name in pending_feedback:
        nl.declare_feedback(name)
    for name in pending_outputs:
        nl.add_output(name)
    nl.n_stages = max(nl.n_stages, declared_stages)
    nl.validate()
    return nl


def load(path: str | Path) -> Netlist:
    return loads(Path(path).read_text())


def save(nl: Netlist, path: str | Path) -> None:
    Path(path).write_text(dumps(nl))


def names(nl: Netlist, idx: Iterable[int]) -> list[str]:
    return [nl.nets[i] for i in idx]
