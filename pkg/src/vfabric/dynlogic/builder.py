"""Dual-rail netlist construction helpers.

A :class:`Sig` is a logical signal carried on a true and a complement net
and produced by a stage (-1 for primary inputs, ``None`` for constants).
Gates consume signals held by the immediately preceding stage; older
signals are carried forward by buffer stages automatically.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .netlist import Netlist, NetlistError


class FanInError(NetlistError):
    pass


@dataclass(frozen=True)
class Sig:
    t: str
    f: str
    stage: int | None

    def __invert__(self) -> "Sig":
        return Sig(self.f, self.t, self.stage)


@dataclass(frozen=True)
class Lit:
    """A literal: signal ``sig`` taken true (``neg=False``) or complemented."""

    sig: Sig
    neg: bool = False


def prime_implicants(ones: set[int], n: int) -> list[tuple[int, int]]:
    """Quine-McCluskey primes of a function given by its on-set.

    Each implicant is (value, mask) where mask bits are don't-cares.
    """
    current = {(m, 0) for m in ones}
    primes: set[tuple[int, int]] = set()
    while current:
        merged = set()
        used = set()
        items = sorted(current)
        for (v1, m1), (v2, m2) in itertools.combinations(items, 2):
            if m1 != m2:
                continue
            diff = v1 ^ v2
            if diff and diff & (diff - 1) == 0:
                merged.add((v1 & ~diff, m1 | diff))
                used.add((v1, m1))
                used.add((v2, m2))
        primes |= current - used
        current = merged
    return sorted(primes)


def cover(ones: set[int], n: int) -> list[tuple[int, int]]:
    """Small prime cover: essential primes first, then greedy."""
    primes = prime_implicants(ones, n)

    def covers(p, m):
        v, mask = p
        return (m & ~mask) == v

    chosen: list[tuple[int, int]] = []
    left = set(ones)
    for m in sorted(ones):
        hits = [p for p in primes if covers(p, m)]
        if len(hits) == 1 and hits[0] not in chosen:
            chosen.append(hits[0])
    for p in chosen:
        left -= {m for m in left if covers(p, m)}
    while left:
        best = max(primes, key=lambda p: (sum(covers(p, m) for m in left), -bin(p[1]).count("0")))
        chosen.append(best)
        left -= {m for m in left if covers(best, m)}
    return sorted(chosen)


class Builder:
    def __init__(self, max_fan_in: int = 9, nl: Netlist | None = None):
        self.nl = nl if nl is not None else Netlist()
        self.max_fan_in = max_fan_in
        self._buffers: dict[tuple[str, int], Sig] = {}
        self._count = itertools.count()
        self.one = Sig("vdd", "gnd", None)
        self.zero = Sig("gnd", "vdd", None)

    def fresh(self, hint: str) -> str:
        """``hint`` itself if unused, else ``hint`` with a numeric suffix."""
        if not hint.endswith("_") and not self.nl.has_net(hint):
            return hint
        while True:
            name = f"{hint}{next(self._count)}" if hint.endswith("_") else f"{hint}_{next(self._count)}"
            if not self.nl.has_net(name):
                return name

    def input(self, name: str) -> Sig:
        self.nl.add_input(name)
        self.nl.add_input(name + "_n", complement_of=name)
        return Sig(name, name + "_n", -1)

    def inputs(self, prefix: str, width: int) -> list[Sig]:
        return [self.input(f"{prefix}{i}") for i in range(width)]

    def output(self, sig: Sig, name: str | None = None, rails: bool = True) -> None:
        self.nl.add_output(sig.t)
        if rails:
            self.nl.add_output(sig.f)

    # ---- stage bookkeeping
    @staticmethod
    def ready(*sigs: Sig) -> int:
        """Earliest stage that can consume all ``sigs``."""
        stages = [s.stage for s in sigs if s.stage is not None]
        return max(stages, default=-1) + 1

    def at(self, sig: Sig, stage: int) -> Sig:
        """``sig`` as held by stage ``stage`` (buffers inserted as needed)."""
        if sig.stage is None or sig.stage == stage:
            return sig
        if sig.stage > stage:
            raise NetlistError(f"signal {sig.t} from stage {sig.stage} is not available at stage {stage}")
        if sig.stage == -1 and stage == -1:
            return sig
        key = (sig.t, stage)
        if (sig.f, stage) in self._buffers:
            return ~self._buffers[(sig.f, stage)]
        if key not in self._buffers:
            prev = self.at(sig, stage - 1)
            base = sig.t.split("@")[0]
            t = self.fresh(f"{base}@{stage}")
            f = self.fresh(f"{t}_n")
            self.nl.add_gate(t, stage, [[prev.f]])
            self.nl.add_gate(f, stage, [[prev.t]])
            self._buffers[key] = Sig(t, f, stage)
        return self._buffers[key]

    def buffer(self, sig: Sig, stage: int | None = None) -> Sig:
        stage = self.ready(sig) if stage is None else stage
        return self.at(sig, stage)

    # ---- gates
    def _terms(self, stage: int, terms: Sequence[Sequence[Lit]]) -> list[list[str]]:
        out = []
        for term in terms:
            if len(term) > self.max_fan_in:
                raise FanInError(f"term fan-in {len(term)} exceeds limit {self.max_fan_in}")
            nets = []
            for lit in term:
                s = self.at(lit.sig, stage - 1)
                nets.append(s.f if lit.neg else s.t)
            out.append(nets)
        return out

    def compound(self, name: str, stage: int, true_terms, false_terms) -> Sig:
        """Dual-rail gate: each rail is an AND of NAND terms over literals."""
        t = self.fresh(name)
        f = self.fresh(t + "_n")
        self.nl.add_gate(t, stage, self._terms(stage, true_terms))
        self.nl.add_gate(f, stage, self._terms(stage, false_terms))
        return Sig(t, f, stage)

    def function(self, name: str, sigs: Sequence[Sig], fn: Callable[..., int], stage: int | None = None) -> Sig:
        """Dual-rail gate realizing an arbitrary Boolean ``fn`` of ``sigs``.

        f = AND over implicants p of (not f) of NAND(p), and likewise for
        the complement rail.
        """
        stage = self.ready(*sigs) if stage is None else stage
        n = len(sigs)
        ones = {m for m in range(2**n) if fn(*[(m >> k) & 1 for k in range(n)])}
        zeros = set(range(2**n)) - ones
        true_terms = self._implicant_terms(sigs, zeros, n)
        false_terms = self._implicant_terms(sigs, ones, n)
        if not true_terms or not false_terms:
            raise NetlistError(f"{name}: constant function")
        return self.compound(name, stage, true_terms, false_terms)

    @staticmethod
    def _implicant_terms(sigs, onset, n) -> list[list[Lit]]:
        terms = []
        for value, mask in cover(onset, n):
            term = [Lit(sigs[k], neg=not (value >> k) & 1) for k in range(n) if not (mask >> k) & 1]
            terms.append(term)
        return terms

    def xor(self, a: Sig, b: Sig, stage: int | None = None, name: str = "x") -> Sig:
        return self.function(name, [a, b], lambda x, y: x ^ y, stage)

    def and_(self, *sigs: Sig, stage: int | None = None, name: str = "and") -> Sig:
        return self.function(name, list(sigs), lambda *v: int(all(v)), stage)

    def or_(self, *sigs: Sig, stage: int | None = None, name: str = "or") -> Sig:
        return self.function(name, list(sigs), lambda *v: int(any(v)), stage)

    def latch(self, name: str, stage: int, init: int = 0) -> Sig:
        """Latch with select/data to be connected later via :meth:`connect`."""
        t = self.fresh(name)
        f = self.fresh(t + "_n")
        self.nl.add_latch(t, f, stage, "vdd", "gnd", init)
        return Sig(t, f, stage)

    def connect(self, latch: Sig, select: Sig, data: Sig) -> None:
        self.nl.connect_latch(latch.t, select.t, data.t)
