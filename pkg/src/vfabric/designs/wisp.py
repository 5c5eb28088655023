"""WISP-4: a 4-bit, five-stage pipelined processor as a dual-rail dynamic netlist.

Each pipeline stage spans three micro-stages of the dual-rail micro-pipeline
(15 micro-stages, one processor cycle = 3 slots):

    0     PC latch (loads the incremented PC every cycle)
    1-2   PC incrementer (carry-lookahead with constant-1 operand) and 4:16 decode
    3     16x9 ROM
    4-5   opcode 3:8 and register 2:4 decode
    6     register file (4 x 4-bit latches)
    7     register read multiplexers
    8-13  ALU: 4-bit CLA, array multiplier (low nibble), immediate and MOV paths
    14    result multiplexer, write enables, retire flag

Latches at stage q may only be loaded from a stage p with (q - p) % 3 == 1,
so the PC loads from stage 2 (one cycle back) and the register file from
stage 14 (three cycles back): an instruction's result is visible to the
third instruction after it.  The full 8-bit product reaches the debug port
at micro-stage 16.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ..dynlogic.builder import Builder, Lit, Sig
from ..dynlogic.sim import PhaseSchedule, SimTrace, Simulator, micro_pipeline, run
from .arith import ClaSpec, gen_cla, multiplier_array
from .common import Design
from .isa import OPCODES, ROM_WORDS, WRITEBACK_DISTANCE, Instruction, N_REGS, WispState
from .primitives import decode_lines, rom_bits

STAGES = 17
RESULT_STAGE = 14
SLOTS_PER_CYCLE = 3
FILL_CYCLES = (RESULT_STAGE + 2) // SLOTS_PER_CYCLE


def gen_wisp4(rom: tuple[int, ...] | list[int] = ()) -> Design:
    words = list(rom)
    if len(words) > ROM_WORDS:
        raise ValueError(f"ROM holds {ROM_WORDS} words")
    b = Builder(max_fan_in=9)
    en = b.input("en")

    pc = [b.latch(f"pc{i}", 0) for i in range(4)]
    carries = [None, b.at(pc[0], 1)] + [b.and_(*pc[:i], stage=1, name=f"pc_c{i}") for i in (2, 3)]
    nxt = [b.at(~pc[0], 2)] + [b.xor(pc[i], carries[i], 2, name=f"pc_next{i}") for i in range(1, 4)]
    for latch, d in zip(pc, nxt):
        b.connect(latch, b.one, d)

    lines = decode_lines(b, pc, 1, prefix="word")
    ins = rom_bits(b, lines, words, 9, 3, prefix="ins")

    op = decode_lines(b, ins[6:9], 4, prefix="op")
    rd = decode_lines(b, ins[4:6], 4, prefix="rd")
    rs = decode_lines(b, ins[0:2], 4, prefix="rs")
    writing = [op[OPCODES[m]] for m in ("MOV", "MOVI", "ADD", "MULT")]
    wop = b.or_(*writing, stage=5, name="wop")

    regs = [[b.latch(f"r{r}_{j}", 6) for j in range(4)] for r in range(N_REGS)]

    def read_port(sel: list[Sig], name: str) -> list[Sig]:
        # one-hot select: x = OR_r(sel_r AND reg_r) = AND_r NAND(sel_r, not reg_r)
        return [
            b.compound(f"{name}{j}", 7,
                       [[Lit(sel[r]), Lit(regs[r][j], True)] for r in range(N_REGS)],
                       [[Lit(sel[r]), Lit(regs[r][j])] for r in range(N_REGS)])
            for j in range(4)
        ]

    dst = read_port(rd, "rdv")
    src = read_port(rs, "rsv")

    alu = gen_cla(ClaSpec(4), b, dst, src, b.zero, prefix="alu_")
    total = alu.outputs["s"]
    product = multiplier_array(b, dst, src, prefix="mul_")

    paths = {"MOV": src, "MOVI": ins[0:4], "ADD": total, "MULT": product[:4]}
    others = [op[k] for k in range(8) if k not in {OPCODES[m] for m in paths}]
    result = []
    for j in range(4):
        true_terms = [[Lit(op[OPCODES[m]]), Lit(v[j], True)] for m, v in paths.items()]
        true_terms += [[Lit(o)] for o in others]
        false_terms = [[Lit(op[OPCODES[m]]), Lit(v[j])] for m, v in paths.items()]
        result.append(b.compound(f"res{j}", RESULT_STAGE, true_terms, false_terms))
    we = [b.and_(en, wop, rd[r], stage=RESULT_STAGE, name=f"we{r}") for r in range(N_REGS)]
    for r in range(N_REGS):
        for j in range(4):
            b.connect(regs[r][j], we[r], result[j])
    retire = b.at(en, RESULT_STAGE)

    is_mult = b.at(op[OPCODES["MULT"]], STAGES - 1)
    debug = [b.at(p, STAGES - 1) for p in product]
    outputs = {"retire": [retire], "result": result, "we": we, "debug_product": debug, "debug_mult": [is_mult]}
    for bus in outputs.values():
        for s in bus:
            b.output(s)
    return Design(b.nl, {"en": [en]}, outputs,
                  {"pc": pc, "regs": regs, "rom": tuple(words)})


@lru_cache(maxsize=32)
def _cached(rom: tuple[int, ...]) -> Design:
    return gen_wisp4(rom)


def schedule() -> PhaseSchedule:
    return micro_pipeline(STAGES, reset_hold=True)


@dataclass
class WispRun:
    state: WispState
    retire_cycles: list[int] = field(default_factory=list)
    debug_products: list[int] = field(default_factory=list)
    slots: int = 0
    trace: SimTrace | None = None

    @property
    def fill_cycles(self) -> int:
        return self.retire_cycles[0] if self.retire_cycles else -1

    def throughput(self) -> float:
        """Instructions retired per cycle between the first and last retirement."""
        if len(self.retire_cycles) < 2:
            return float(len(self.retire_cycles))
        span = self.retire_cycles[-1] - self.retire_cycles[0] + 1
        return len(self.retire_cycles) / span


def run_wisp(program, cycles: int = ROM_WORDS, keep_trace: bool = False) -> WispRun:
    """Simulate the pipeline fetching ``cycles`` instructions, then drain it."""
    words = tuple(i.encode() if isinstance(i, Instruction) else int(i) for i in program)
    design = _cached(words)
    nl = design.nl
    sch = schedule()
    # the last enabled wave writes its registers WRITEBACK_DISTANCE cycles later
    waves = cycles + max(WRITEBACK_DISTANCE, (STAGES + 2) // SLOTS_PER_CYCLE) + 1
    stream = [{"en": k < cycles} for k in range(waves)]
    pc_latches = [s.t for s in design.meta["pc"]]
    captured = {}

    def grab(sim: Simulator) -> None:
        captured["sim"] = sim
        # PC fetched by the first disabled wave = architectural PC after the run
        if sim.slot == cycles * SLOTS_PER_CYCLE + 2:
            captured["pc"] = sum(int(sim.state[nl.net(n)][0]) << i for i, n in enumerate(pc_latches))

    trace = run(nl, sch, stream, slots=waves * SLOTS_PER_CYCLE, watch=[] if not keep_trace else None, on_slot=grab)
    sim: Simulator = captured["sim"]
    regs = []
    for r in range(N_REGS):
        bits = [int(sim.state[nl.net(s.t)][0]) for s in design.meta["regs"][r]]
        regs.append(sum(v << j for j, v in enumerate(bits)))
    retire = trace.samples(design.outputs["retire"][0].t)
    retire_cycles = [slot // SLOTS_PER_CYCLE for slot, v in retire if v[0]]
    products = []
    mult_ev = trace.samples(design.outputs["debug_mult"][0].t)
    for k, (slot, flag) in enumerate(mult_ev):
        if flag[0] and k < cycles:
            bits = [int(trace.samples(s.t)[k][1][0]) for s in design.outputs["debug_product"]]
            products.append(sum(v << j for j, v in enumerate(bits)))
    state = WispState(pc=captured.get("pc", 0), regs=regs, rom=list(words) + [0] * (ROM_WORDS - len(words)),
                      retired=len(retire_cycles), cycles=cycles + FILL_CYCLES,
                      debug_product=products[-1] if products else 0)
    return WispRun(state, retire_cycles, products, waves * SLOTS_PER_CYCLE, trace if keep_trace else None)
