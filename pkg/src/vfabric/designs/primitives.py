"""Decoder, ROM and latch building blocks."""
from __future__ import annotations

from ..dynlogic.builder import Builder, Lit, Sig
from .common import Design, finish

ROM_WORDS = 16
ROM_BITS = 9


class CapacityError(ValueError):
    pass


def decode_lines(b: Builder, addr: list[Sig], stage: int | None = None, prefix: str = "w") -> list[Sig]:
    """One-hot lines, line k asserted when the address equals k (LSB first)."""
    n = len(addr)
    stage = b.ready(*addr) if stage is None else stage
    lines = []
    for k in range(2**n):
        lits = [Lit(addr[i], neg=not (k >> i) & 1) for i in range(n)]
        # line = AND(lits): true rail NANDs each inverted literal, complement is NAND(lits)
        off = [[Lit(x.sig, not x.neg)] for x in lits]
        lines.append(b.compound(f"{prefix}{k}", stage, off, [lits]))
    return lines


def gen_decoder(n: int) -> Design:
    """n-to-2^n decoder as two cascaded stages (decode, then buffer)."""
    if n not in (2, 3, 4):
        raise ValueError("decoder address width must be 2, 3 or 4")
    b = Builder()
    addr = b.inputs("a", n)
    lines = decode_lines(b, addr, 0)
    lines = [b.at(s, 1) for s in lines]
    return finish(b, {"a": addr}, {"line": lines})


def rom_bits(b: Builder, lines: list[Sig], words: list[int], width: int = ROM_BITS,
             stage: int | None = None, prefix: str = "rom") -> list[Sig]:
    """Preconfigured ROM read by one-hot word lines.

    With exactly one line asserted, bit j is the AND over words storing 0 at
    j of NAND(line); its complement rail uses the words storing 1.
    """
    if len(words) > ROM_WORDS or len(lines) > ROM_WORDS:
        raise CapacityError(f"ROM holds at most {ROM_WORDS} words")
    if width > ROM_BITS:
        raise CapacityError(f"ROM words are at most {ROM_BITS} bits")
    words = list(words) + [0] * (len(lines) - len(words))
    stage = b.ready(*lines) if stage is None else stage
    bits = []
    for j in range(width):
        zeros = [[Lit(lines[w])] for w in range(len(lines)) if not (words[w] >> j) & 1]
        ones = [[Lit(lines[w])] for w in range(len(lines)) if (words[w] >> j) & 1]
        # a rail with no terms is the constant NAND(gnd) = 1
        bits.append(b.compound(f"{prefix}{j}", stage, zeros or [[Lit(b.zero)]], ones or [[Lit(b.zero)]]))
    return bits


def gen_rom(words: list[int], width: int = ROM_BITS) -> Design:
    """Address decoder followed by a preconfigured ROM."""
    if len(words) > ROM_WORDS:
        raise CapacityError(f"ROM holds at most {ROM_WORDS} words")
    n = max(2, (len(words) - 1).bit_length())
    b = Builder()
    addr = b.inputs("a", n)
    lines = decode_lines(b, addr, 0)
    bits = rom_bits(b, lines, words, width, 1)
    return finish(b, {"a": addr}, {"bits": bits})


def gen_latch() -> Design:
    """Single-bit select/data latch: selected data is latched, otherwise retained."""
    b = Builder()
    sel = b.input("sel")
    d = b.input("d")
    q = b.latch("q", 0)
    b.connect(q, sel, d)
    return finish(b, {"sel": [sel], "d": [d]}, {"q": [q]})
