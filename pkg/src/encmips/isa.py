"""Instruction formats, opcode table, and word-level encode/decode.

Field layout (32-bit word, bit 31 on the left):
    R-type: opcode(6) | rs(5) | rt(5) | rd(5) | shamt(5) | funct(6)
    I-type: opcode(6) | rs(5) | rt(5) | imm(16, two's complement)
    J-type: opcode(6) | target(26)

The standard MIPS subset keeps its classic opcode/funct values; the three
key-handling instructions (lklw, lkuw, crypt) take otherwise unused opcodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

WORD_MASK = 0xFFFFFFFF

OP_RTYPE = 0x00
OP_J     = 0x02
OP_BEQ   = 0x04
OP_BNE   = 0x05
OP_ADDI  = 0x08
OP_LKLW  = 0x1A
OP_LKUW  = 0x1B
OP_CRYPT = 0x1C
OP_LW    = 0x23
OP_SW    = 0x2B

FUNCT_SLL = 0x00
FUNCT_ADD = 0x20
FUNCT_SUB = 0x22
FUNCT_AND = 0x24
FUNCT_OR  = 0x25
FUNCT_SLT = 0x2A

R_FUNCTS = {
    FUNCT_SLL: "sll",
    FUNCT_ADD: "add",
    FUNCT_SUB: "sub",
    FUNCT_AND: "and",
    FUNCT_OR:  "or",
    FUNCT_SLT: "slt",
}
I_OPCODES = {
    OP_ADDI: "addi",
    OP_LW:   "lw",
    OP_SW:   "sw",
    OP_BEQ:  "beq",
    OP_BNE:  "bne",
    OP_LKLW: "lklw",
    OP_LKUW: "lkuw",
}
J_OPCODES = {
    OP_J:     "j",
    OP_CRYPT: "crypt",
}

R_OPCODES = {name: funct for funct, name in R_FUNCTS.items()}
I_MNEMONICS = {name: op for op, name in I_OPCODES.items()}
J_MNEMONICS = {name: op for op, name in J_OPCODES.items()}

MNEMONICS = frozenset(R_OPCODES) | frozenset(I_MNEMONICS) | frozenset(J_MNEMONICS)

NOP_WORD = 0x00000000


class IsaError(Exception):
    pass


class UnknownInstruction(IsaError):
    """Raised when a word's (opcode, funct) pair is not in the opcode table."""

    def __init__(self, word: int):
        self.word = word & WORD_MASK
        self.fields = raw_fields(word)
        super().__init__(f"unknown instruction word 0x{self.word:08x} "
                         f"(opcode 0x{self.fields.opcode:02x}, funct 0x{self.fields.funct:02x})")


class FieldOverflow(IsaError):
    """Raised when an instruction field value exceeds its bit width."""

    def __init__(self, field: str, value: int):
        self.field = field
        self.value = value
        super().__init__(f"field {field} cannot hold {value}")


class RawFields(NamedTuple):
    opcode: int
    rs: int
    rt: int
    rd: int
    shamt: int
    funct: int
    imm: int
    target: int


def raw_fields(word: int) -> RawFields:
    """Split a 32-bit word into every possible field, no validity check."""
    word &= WORD_MASK
    return RawFields(
        opcode=(word >> 26) & 0x3F,
        rs=(word >> 21) & 0x1F,
        rt=(word >> 16) & 0x1F,
        rd=(word >> 11) & 0x1F,
        shamt=(word >> 6) & 0x1F,
        funct=word & 0x3F,
        imm=word & 0xFFFF,
        target=word & 0x3FFFFFF,
    )


def sign_extend_16(value: int) -> int:
    value &= 0xFFFF
    return value - 0x10000 if value & 0x8000 else value


def _check(field: str, value: int, lo: int, hi: int) -> int:
    if not lo <= value <= hi:
        raise FieldOverflow(field, value)
    return value


@dataclass(frozen=True)
class RType:
    mnemonic: str
    rs: int
    rt: int
    rd: int
    shamt: int = 0


@dataclass(frozen=True)
class IType:
    mnemonic: str
    rs: int
    rt: int
    imm: int  # canonical signed form, -32768..32767


@dataclass(frozen=True)
class JType:
    mnemonic: str
    target: int


Instruction = Union[RType, IType, JType]


def decode(word: int) -> Instruction:
    """Decode a 32-bit word; raises UnknownInstruction for unlisted (op, funct)."""
    f = raw_fields(word)
    if f.opcode == OP_RTYPE:
        name = R_FUNCTS.get(f.funct)
        if name is None:
            raise UnknownInstruction(word)
        return RType(name, rs=f.rs, rt=f.rt, rd=f.rd, shamt=f.shamt)
    name = I_OPCODES.get(f.opcode)
    if name is not None:
        return IType(name, rs=f.rs, rt=f.rt, imm=sign_extend_16(f.imm))
    name = J_OPCODES.get(f.opcode)
    if name is not None:
        return JType(name, target=f.target)
    raise UnknownInstruction(word)


def encode(instr: Instruction) -> int:
    """Bit-exact inverse of decode; raises FieldOverflow on out-of-width fields."""
    if isinstance(instr, RType):
        funct = R_OPCODES[instr.mnemonic]
        return (_check("rs", instr.rs, 0, 31) << 21
                | _check("rt", instr.rt, 0, 31) << 16
                | _check("rd", instr.rd, 0, 31) << 11
                | _check("shamt", instr.shamt, 0, 31) << 6
                | funct)
    if isinstance(instr, IType):
        op = I_MNEMONICS[instr.mnemonic]
        _check("imm", instr.imm, -32768, 32767)
        return (op << 26
                | _check("rs", instr.rs, 0, 31) << 21
                | _check("rt", instr.rt, 0, 31) << 16
                | (instr.imm & 0xFFFF))
    op = J_MNEMONICS[instr.mnemonic]
    return op << 26 | _check("target", instr.target, 0, 0x3FFFFFF)


def is_nop(instr: Instruction) -> bool:
    return instr == RType("sll", 0, 0, 0, 0)


def disassemble(instr: Instruction) -> str:
    """Canonical text form, reparseable by the assembler.

    Branch and jump operands come out as raw field values (slot displacement
    for beq/bne, slot index for j) since labels are gone at this level.
    """
    if isinstance(instr, RType):
        if is_nop(instr):
            return "nop"
        if instr.mnemonic == "sll":
            return f"sll $r{instr.rd}, $r{instr.rt}, {instr.shamt}"
        return f"{instr.mnemonic} $r{instr.rd}, $r{instr.rs}, $r{instr.rt}"
    if isinstance(instr, IType):
        if instr.mnemonic in ("lw", "sw"):
            return f"{instr.mnemonic} $r{instr.rt}, {instr.imm}($r{instr.rs})"
        if instr.mnemonic in ("lklw", "lkuw"):
            return f"{instr.mnemonic} {instr.imm}($r{instr.rs})"
        if instr.mnemonic in ("beq", "bne"):
            return f"{instr.mnemonic} $r{instr.rs}, $r{instr.rt}, {instr.imm}"
        return f"addi $r{instr.rt}, $r{instr.rs}, {instr.imm}"
    return f"{instr.mnemonic} {instr.target}"


def disasm_word(word: int) -> str:
    """Best-effort disassembly for traces; never raises."""
    try:
        return disassemble(decode(word))
    except UnknownInstruction:
        return f".word 0x{word & WORD_MASK:08x}"
