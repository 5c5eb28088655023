"""WISP-4 instruction set: encoding, assembler, disassembler and reference interpreter.

Word layout (9 bits): opcode[8:6] rd[5:4] low[3:0], where low holds the
4-bit immediate for MOVI and the source register in bits [1:0] otherwise.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

OPCODES = {"NOP": 0b000, "MOV": 0b001, "MOVI": 0b010, "ADD": 0b011, "MULT": 0b100}
MNEMONICS = {v: k for k, v in OPCODES.items()}
WRITES = {"MOV", "MOVI", "ADD", "MULT"}
N_REGS = 4
ROM_WORDS = 16
# the result of instruction j is first visible to instruction j + WRITEBACK_DISTANCE
WRITEBACK_DISTANCE = 3
NOPS_BETWEEN_DEPENDENT = WRITEBACK_DISTANCE - 1


class AsmError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    op: str
    rd: int = 0
    rs: int = 0
    imm: int = 0

    def __post_init__(self) -> None:
        if self.op not in OPCODES:
            raise ValueError(f"unknown opcode {self.op}")
        if not (0 <= self.rd < N_REGS and 0 <= self.rs < N_REGS and 0 <= self.imm < 16):
            raise ValueError("operand out of range")

    def encode(self) -> int:
        low = self.imm if self.op == "MOVI" else (self.rs if self.op in ("MOV", "ADD", "MULT") else 0)
        rd = self.rd if self.op != "NOP" else 0
        return (OPCODES[self.op] << 6) | (rd << 4) | low

    def __str__(self) -> str:
        if self.op == "NOP":
            return "NOP"
        if self.op == "MOVI":
            return f"MOVI R{self.rd},#{self.imm}"
        return f"{self.op} R{self.rd},R{self.rs}"

    @property
    def sources(self) -> tuple[int, ...]:
        if self.op == "MOV":
            return (self.rs,)
        if self.op in ("ADD", "MULT"):
            return (self.rd, self.rs)
        return ()


def decode(word: int) -> Instruction:
    if not 0 <= word < 512:
        raise DecodeError(f"word {word} is not 9 bits")
    op = word >> 6
    if op not in MNEMONICS:
        raise DecodeError(f"illegal opcode {op:03b}")
    name = MNEMONICS[op]
    rd, low = (word >> 4) & 3, word & 15
    if name == "NOP":
        return Instruction("NOP")
    if name == "MOVI":
        return Instruction(name, rd, imm=low)
    return Instruction(name, rd, rs=low & 3)


_REG = r"R([0-3])"
_IMM = r"#?(0x[0-9a-fA-F]+|0b[01]+|\d+)"
_PATTERNS = {
    "NOP": re.compile(r"^$"),
    "MOVI": re.compile(rf"^{_REG}\s*,\s*{_IMM}$", re.I),
    "MOV": re.compile(rf"^{_REG}\s*,\s*{_REG}$", re.I),
    "ADD": re.compile(rf"^{_REG}\s*,\s*{_REG}$", re.I),
    "MULT": re.compile(rf"^{_REG}\s*,\s*{_REG}$", re.I),
}


def parse(text: str) -> list[Instruction]:
    prog = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        op = head.upper()
        if op not in _PATTERNS:
            raise AsmError(f"unknown mnemonic {head!r}", lineno)
        m = _PATTERNS[op].match(rest.strip())
        if not m:
            raise AsmError(f"bad operands for {op}: {rest.strip()!r}", lineno)
        if op == "NOP":
            prog.append(Instruction("NOP"))
        elif op == "MOVI":
            imm = int(m.group(2), 0)
            if not 0 <= imm < 16:
                raise AsmError(f"immediate {imm} does not fit in 4 bits", lineno)
            prog.append(Instruction(op, int(m.group(1)), imm=imm))
        else:
            prog.append(Instruction(op, int(m.group(1)), int(m.group(2))))
        if len(prog) > ROM_WORDS:
            raise AsmError(f"program longer than {ROM_WORDS} instructions", lineno)
    return prog


def assemble(text: str) -> list[int]:
    return [ins.encode() for ins in parse(text)]


def disassemble(words: list[int]) -> str:
    return "\n".join(str(decode(w)) for w in words) + ("\n" if words else "")


def rom_image(words: list[int]) -> str:
    """16 lines of 9 binary digits, unused words filled with NOP."""
    padded = list(words) + [0] * (ROM_WORDS - len(words))
    return "\n".join(f"{w:09b}" for w in padded) + "\n"


def read_rom_image(text: str) -> list[int]:
    words = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if not re.fullmatch(r"[01]{9}", line):
            raise AsmError("ROM lines must be 9 binary digits", lineno)
        words.append(int(line, 2))
    if len(words) > ROM_WORDS:
        raise AsmError(f"ROM image longer than {ROM_WORDS} words")
    return words


def hazards(program: list[Instruction]) -> list[tuple[int, int, int]]:
    """(writer, reader, register) pairs closer than the write-back distance."""
    found = []
    for j, ins in enumerate(program):
        for k in range(max(0, j - NOPS_BETWEEN_DEPENDENT), j):
            prev = program[k]
            if prev.op in WRITES and prev.rd in ins.sources:
                found.append((k, j, prev.rd))
    return found


@dataclass
class WispState:
    pc: int = 0
    regs: list[int] = field(default_factory=lambda: [0] * N_REGS)
    rom: list[int] = field(default_factory=lambda: [0] * ROM_WORDS)
    retired: int = 0
    cycles: int = 0
    debug_product: int = 0

    def dump(self) -> str:
        return "\n".join(f"R{i} = {v:04b} ({v})" for i, v in enumerate(self.regs))


def execute(state: WispState, ins: Instruction) -> None:
    r = state.regs
    if ins.op == "MOV":
        r[ins.rd] = r[ins.rs]
    elif ins.op == "MOVI":
        r[ins.rd] = ins.imm
    elif ins.op == "ADD":
        r[ins.rd] = (r[ins.rd] + r[ins.rs]) & 15
    elif ins.op == "MULT":
        state.debug_product = r[ins.rd] * r[ins.rs]
        r[ins.rd] = state.debug_product & 15


def wisp_reference(program: list[int] | list[Instruction], max_cycles: int = ROM_WORDS) -> WispState:
    """Run the ROM image sequentially for ``max_cycles`` fetches (PC wraps mod 16)."""
    words = [i.encode() if isinstance(i, Instruction) else int(i) for i in program]
    if len(words) > ROM_WORDS:
        raise AsmError(f"program longer than {ROM_WORDS} instructions")
    st = WispState(rom=words + [0] * (ROM_WORDS - len(words)))
    for _ in range(max_cycles):
        execute(st, decode(st.rom[st.pc]))
        st.pc = (st.pc + 1) % ROM_WORDS
        st.retired += 1
        st.cycles += 1
    return st
