"""Carry-lookahead adders and the 4x4 array multiplier."""
from __future__ import annotations

from dataclasses import dataclass

from ..dynlogic.builder import Builder, Lit, Sig
from .common import Design, finish

CLA_FAN_IN = {4: 4, 8: 9, 16: 9}


@dataclass(frozen=True)
class ClaSpec:
    width: int
    max_fan_in: int | None = None

    def __post_init__(self) -> None:
        if self.width % 4 or self.width < 4:
            raise ValueError("CLA width must be a positive multiple of 4")

    @property
    def fan_in(self) -> int:
        if self.max_fan_in is not None:
            return self.max_fan_in
        return CLA_FAN_IN.get(self.width, 9)


def carry_block(b: Builder, p: list[Sig], g: list[Sig], cin: Sig, stage: int, first: int = 1,
                name: str = "c") -> list[Sig]:
    """Flattened carries of c_{i+1} = g_i + p_i c_i, all in one stage.

    True rail: AND over the implicants of not-c of NAND(implicant);
    complement rail: AND over the implicants of c.  A constant-0 ``cin``
    drops out of both.
    """
    zero_in = cin.stage is None and cin.t == "gnd"
    carries = []
    for i in range(1, len(p) + 1):
        # c_i = g_{i-1} + p_{i-1} g_{i-2} + ... + p_{i-1}..p_0 cin
        on = [[Lit(p[k]) for k in range(i - 1, j, -1)] + [Lit(g[j])] for j in range(i - 1, -1, -1)]
        # not c_i = sum_j (not g_{i-1} .. not g_j)(not p_j) + (all not g)(not cin)
        off = [[Lit(g[k], True) for k in range(i - 1, j - 1, -1)] + [Lit(p[j], True)] for j in range(i - 1, -1, -1)]
        all_ng = [Lit(g[k], True) for k in range(i - 1, -1, -1)]
        if zero_in:
            off = off[:-1] + [all_ng]
        else:
            on.append([Lit(p[k]) for k in range(i - 1, -1, -1)] + [Lit(cin)])
            off.append(all_ng + [Lit(cin, True)])
        carries.append(b.compound(f"{name}{first + i - 1}", stage, off, on))
    return carries


def gen_cla(spec: ClaSpec | int, b: Builder | None = None, a: list[Sig] | None = None,
            bb: list[Sig] | None = None, cin: Sig | None = None, prefix: str = "") -> Design:
    """Dual-rail CLA: propagate/generate, carry, buffer and sum stages.

    Carries are computed in blocks of at most eight; each block after the
    first takes the previous block's carry-out as its carry-in one stage
    later.  Bit 0 folds the carry-in into its generate term.
    """
    if isinstance(spec, int):
        spec = ClaSpec(spec)
    w = spec.width
    own = b is None
    b = b or Builder(max_fan_in=spec.fan_in)
    saved = b.max_fan_in
    b.max_fan_in = spec.fan_in
    try:
        a = a if a is not None else b.inputs(prefix + "a", w)
        bb = bb if bb is not None else b.inputs(prefix + "b", w)
        cin = cin if cin is not None else b.input(prefix + "cin")
        s0 = b.ready(*a, *bb, cin)
        p = [b.xor(a[i], bb[i], s0, name=f"{prefix}p{i}") for i in range(w)]
        g = [b.function(f"{prefix}g0", [a[0], bb[0], cin], lambda x, y, z: int(x + y + z >= 2), s0)]
        g += [b.and_(a[i], bb[i], stage=s0, name=f"{prefix}g{i}") for i in range(1, w)]
        # g0 already includes cin, so the first block's carry-in is constant 0
        # blocks of at most 8 carries; blocks after the first spend one input on the carry-in
        carries: list[Sig] = []
        carry_in = b.zero
        stage = s0 + 1
        lo = 0
        while lo < w:
            block = min(8, spec.fan_in if lo == 0 else spec.fan_in - 1)
            hi = min(w, lo + block)
            cs = carry_block(b, p[lo:hi], g[lo:hi], carry_in, stage, lo + 1, prefix + "c")
            carries += cs
            carry_in = cs[-1]
            stage += 1
            lo = hi
        sum_stage = max(stage, s0 + 3)
        c_all = [cin] + carries
        s = [b.xor(p[i], c_all[i], sum_stage, name=f"{prefix}s{i}") for i in range(w)]
        cout = b.at(carries[-1], sum_stage)
    finally:
        b.max_fan_in = saved
    if not own:
        return Design(b.nl, {"a": a, "b": bb, "cin": [cin]}, {"s": s, "cout": [cout]})
    return finish(b, {"a": a, "b": bb, "cin": [cin]}, {"s": s, "cout": [cout]}, width=w)


def full_adder(b: Builder, x: Sig, y: Sig, z: Sig, name: str) -> tuple[Sig, Sig]:
    s = b.function(name + "s", [x, y, z], lambda u, v, w: u ^ v ^ w)
    c = b.function(name + "c", [x, y, z], lambda u, v, w: int(u + v + w >= 2))
    return s, c


def half_adder(b: Builder, x: Sig, y: Sig, name: str) -> tuple[Sig, Sig]:
    return b.xor(x, y, name=name + "s"), b.and_(x, y, name=name + "c")


def multiplier_array(b: Builder, a: list[Sig], m: list[Sig], prefix: str = "") -> list[Sig]:
    """Ripple array product bits (LSB first); partial products in the first
    stage, then each adder as soon as its inputs are ready."""
    width = len(a)
    s0 = b.ready(*a, *m)
    pp = [[b.and_(a[j], m[i], stage=s0, name=f"{prefix}pp{i}_{j}") for j in range(width)] for i in range(width)]
    product = [pp[0][0]]
    acc = pp[0][1:]  # upper bits of the running sum, weights 1..width-1
    carry_top: Sig | None = None
    for r in range(1, width):
        row = pp[r]
        new: list[Sig] = []
        c: Sig | None = None
        upper = acc + ([carry_top] if carry_top is not None else [])
        for j in range(width):
            x = upper[j] if j < len(upper) else None
            name = f"{prefix}r{r}b{j}"
            if x is None:
                s, c = half_adder(b, row[j], c, name)
            elif c is None:
                s, c = half_adder(b, x, row[j], name)
            else:
                s, c = full_adder(b, x, row[j], c, name)
            new.append(s)
        product.append(new[0])
        acc = new[1:]
        carry_top = c
    return product + acc + [carry_top]


def gen_multiplier4(width: int = 4) -> Design:
    b = Builder(max_fan_in=9)
    a = b.inputs("a", width)
    m = b.inputs("b", width)
    return finish(b, {"a": a, "b": m}, {"p": multiplier_array(b, a, m)}, width=width)
