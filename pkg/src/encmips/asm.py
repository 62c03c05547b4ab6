"""Two-pass assembler, 64-bit block packing, image encryption, hex image I/O.

Source dialect: one statement per line, `label:` prefixes, `#` or `;`
comments, registers `$r0..$r31` (or `$0..$31`), decimal or 0x-hex
immediates, `offset($reg)` memory operands, label or raw-number branch and
jump targets. Instruction words sit 8 bytes apart (one per 64-bit block),
so jump targets and branch displacements are counted in 8-byte slots.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from . import des, isa


class AsmError(Exception):
    """Base for assembler errors; carries the source line when known."""

    def __init__(self, reason: str, line: Optional[int] = None):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}" if line is not None else reason)


class AsmSyntaxError(AsmError):
    pass


class UndefinedLabel(AsmError):
    pass


class DuplicateLabel(AsmError):
    pass


class BranchOutOfRange(AsmError):
    pass


class NoCryptInstruction(AsmError):
    def __init__(self):
        super().__init__("image contains no crypt instruction")


class MultipleCryptInstructions(AsmError):
    def __init__(self):
        super().__init__("image contains more than one crypt instruction")


class BadHexLine(AsmError):
    pass


class UnalignedAddressDirective(AsmError):
    pass


@dataclass(frozen=True)
class Reg:
    index: int


@dataclass(frozen=True)
class Imm:
    value: int


@dataclass(frozen=True)
class MemRef:
    offset: int
    base: int


@dataclass(frozen=True)
class LabelRef:
    name: str


Operand = Union[Reg, Imm, MemRef, LabelRef]


@dataclass
class Statement:
    label: Optional[str]
    mnemonic: Optional[str]  # None for a label-only line
    operands: List[Operand]
    line: int


@dataclass
class ProgramImage:
    """64-bit blocks with their byte addresses, plus assembler metadata.

    Assembler output is contiguous from address 0 (block i at byte 8*i);
    images read back from hex text may be sparse. crypt_boundary, when set,
    is the entry index of the first encrypted block.
    """

    entries: List[Tuple[int, int]] = field(default_factory=list)
    symbols: Dict[str, int] = field(default_factory=dict)
    crypt_boundary: Optional[int] = None

    @property
    def blocks(self) -> List[int]:
        return [block for _, block in self.entries]


_LABEL_RE = re.compile(r"^([A-Za-z_]\w*)\s*:")
_REG_RE = re.compile(r"^\$[rR]?(\d+)$")
_MEM_RE = re.compile(r"^([+-]?(?:0[xX][0-9a-fA-F]+|\d+))\(\s*(\$[rR]?\d+)\s*\)$")
_NUM_RE = re.compile(r"^[+-]?(?:0[xX][0-9a-fA-F]+|\d+)$")
_IDENT_RE = re.compile(r"^[A-Za-z_]\w*$")

_ALIASES = {"lkw": "lklw"}

# operand shape per mnemonic: r = register, i = immediate/shamt,
# m = offset(base), t = branch/jump target (label or raw number)
_SHAPES = {
    "add": "rrr", "sub": "rrr", "and": "rrr", "or": "rrr", "slt": "rrr",
    "sll": "rri",
    "addi": "rri",
    "lw": "rm", "sw": "rm",
    "lklw": "m", "lkuw": "m",
    "beq": "rrt", "bne": "rrt",
    "j": "t",
    "crypt": "i",
}


def _parse_reg(text: str, line: int) -> Reg:
    m = _REG_RE.match(text)
    if not m:
        raise AsmSyntaxError(f"expected register, got '{text}'", line)
    index = int(m.group(1))
    if index > 31:
        raise AsmSyntaxError(f"no such register '{text}'", line)
    return Reg(index)


def _parse_operand(text: str, kind: str, line: int) -> Operand:
    if kind == "r":
        return _parse_reg(text, line)
    if kind == "m":
        m = _MEM_RE.match(text)
        if not m:
            raise AsmSyntaxError(f"expected offset($reg), got '{text}'", line)
        return MemRef(int(m.group(1), 0), _parse_reg(m.group(2), line).index)
    if kind == "i":
        if not _NUM_RE.match(text):
            raise AsmSyntaxError(f"expected number, got '{text}'", line)
        return Imm(int(text, 0))
    # kind == "t": label or raw slot number
    if _NUM_RE.match(text):
        return Imm(int(text, 0))
    if _IDENT_RE.match(text):
        return LabelRef(text)
    raise AsmSyntaxError(f"expected label or number, got '{text}'", line)


def parse(source: str) -> List[Statement]:
    """Parse assembly text into one Statement per non-empty line."""
    statements = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = re.split(r"[#;]", raw, maxsplit=1)[0].strip()
        if not text:
            continue
        label = None
        m = _LABEL_RE.match(text)
        if m:
            label = m.group(1)
            text = text[m.end():].strip()
        if not text:
            statements.append(Statement(label, None, [], lineno))
            continue
        parts = text.split(None, 1)
        mnemonic = parts[0].lower()
        mnemonic = _ALIASES.get(mnemonic, mnemonic)
        if mnemonic == "nop":
            if len(parts) > 1:
                raise AsmSyntaxError("nop takes no operands", lineno)
            statements.append(Statement(label, "sll",
                                        [Reg(0), Reg(0), Imm(0)], lineno))
            continue
        shape = _SHAPES.get(mnemonic)
        if shape is None:
            raise AsmSyntaxError(f"unknown mnemonic '{parts[0]}'", lineno)
        fields = [f.strip() for f in parts[1].split(",")] if len(parts) > 1 else []
        if len(fields) != len(shape):
            raise AsmSyntaxError(
                f"'{mnemonic}' takes {len(shape)} operand(s), got {len(fields)}",
                lineno)
        operands = [_parse_operand(f, k, lineno) for f, k in zip(fields, shape)]
        statements.append(Statement(label, mnemonic, operands, lineno))
    return statements


def _signed_imm(value: int, line: int) -> int:
    # accept unsigned-style 0x8000..0xFFFF and fold into the signed range
    if 32768 <= value <= 65535:
        value -= 65536
    if not -32768 <= value <= 32767:
        raise AsmError(f"immediate {value} does not fit 16 bits", line)
    return value


def _ensure_key_load_guards(statements: List[Statement]) -> List[Statement]:
    """Guarantee at least two instructions between a key load and crypt."""
    out: List[Statement] = []
    since_key_load: Optional[int] = None
    for stmt in statements:
        if stmt.mnemonic == "crypt" and since_key_load is not None:
            missing = 2 - since_key_load
            label, stmt.label = stmt.label, None
            for k in range(missing):
                out.append(Statement(label if k == 0 else None, "sll",
                                     [Reg(0), Reg(0), Imm(0)], stmt.line))
                label = None
            stmt.label = label
        out.append(stmt)
        if stmt.mnemonic in ("lklw", "lkuw"):
            since_key_load = 0
        elif stmt.mnemonic is not None:
            if since_key_load is not None:
                since_key_load += 1
            if stmt.mnemonic == "crypt" or (since_key_load or 0) >= 2:
                since_key_load = None
    return out


def assemble(statements: List[Statement],
             auto_nop: bool = False) -> Tuple[List[int], Dict[str, int]]:
    """Two passes: place labels at byte addresses 8*i, then encode words."""
    if auto_nop:
        statements = _ensure_key_load_guards(statements)

    symbols: Dict[str, int] = {}
    addr = 0
    for stmt in statements:
        if stmt.label is not None:
            if stmt.label in symbols:
                raise DuplicateLabel(f"duplicate label '{stmt.label}'", stmt.line)
            symbols[stmt.label] = addr
        if stmt.mnemonic is not None:
            addr += 8

    words = []
    addr = 0
    for stmt in statements:
        if stmt.mnemonic is None:
            continue
        words.append(_encode_statement(stmt, addr, symbols))
        addr += 8
    return words, symbols


def _resolve_target(op: Operand, symbols: Dict[str, int], line: int) -> Tuple[bool, int]:
    """Returns (is_address, value): label operands give byte addresses,
    numeric operands are raw field values."""
    if isinstance(op, LabelRef):
        if op.name not in symbols:
            raise UndefinedLabel(f"undefined label '{op.name}'", line)
        return True, symbols[op.name]
    assert isinstance(op, Imm)
    return False, op.value


def _encode_statement(stmt: Statement, addr: int, symbols: Dict[str, int]) -> int:
    mn, ops, line = stmt.mnemonic, stmt.operands, stmt.line
    try:
        if mn in ("add", "sub", "and", "or", "slt"):
            rd, rs, rt = ops
            return isa.encode(isa.RType(mn, rs=rs.index, rt=rt.index, rd=rd.index))
        if mn == "sll":
            rd, rt, shamt = ops
            return isa.encode(isa.RType(mn, rs=0, rt=rt.index, rd=rd.index,
                                        shamt=shamt.value))
        if mn == "addi":
            rt, rs, imm = ops
            return isa.encode(isa.IType(mn, rs=rs.index, rt=rt.index,
                                        imm=_signed_imm(imm.value, line)))
        if mn in ("lw", "sw"):
            rt, mem = ops
            return isa.encode(isa.IType(mn, rs=mem.base, rt=rt.index,
                                        imm=_signed_imm(mem.offset, line)))
        if mn in ("lklw", "lkuw"):
            (mem,) = ops
            return isa.encode(isa.IType(mn, rs=mem.base, rt=0,
                                        imm=_signed_imm(mem.offset, line)))
        if mn in ("beq", "bne"):
            rs, rt, target = ops
            is_addr, value = _resolve_target(target, symbols, line)
            disp = (value - (addr + 8)) // 8 if is_addr else value
            if not -32768 <= disp <= 32767:
                raise BranchOutOfRange(f"branch displacement {disp} "
                                       "does not fit 16 bits", line)
            return isa.encode(isa.IType(mn, rs=rs.index, rt=rt.index, imm=disp))
        if mn == "j":
            (target,) = ops
            is_addr, value = _resolve_target(target, symbols, line)
            slot = value // 8 if is_addr else value
            if not 0 <= slot <= 0x3FFFFFF:
                raise BranchOutOfRange(f"jump target {slot} "
                                       "does not fit 26 bits", line)
            return isa.encode(isa.JType(mn, target=slot))
        assert mn == "crypt"
        (flag,) = ops
        return isa.encode(isa.JType(mn, target=flag.value))
    except isa.FieldOverflow as exc:
        raise AsmError(str(exc), line) from exc


def pack(words: List[int]) -> List[int]:
    """Zero-pad each 32-bit word into its own 64-bit block."""
    return [des.pad_word(w) for w in words]


def build_image(source: str, auto_nop: bool = False) -> ProgramImage:
    """Parse + assemble + pack a source file into a contiguous image."""
    words, symbols = assemble(parse(source), auto_nop=auto_nop)
    blocks = pack(words)
    return ProgramImage(entries=[(8 * i, b) for i, b in enumerate(blocks)],
                        symbols=dict(symbols))


def encrypt_image(image: ProgramImage, key: int,
                  boundary: Optional[int] = None) -> ProgramImage:
    """Encrypt every block strictly after the crypt instruction's block.

    With no explicit boundary the single crypt instruction in the image is
    located by its opcode; its own block stays plaintext.
    """
    if boundary is None:
        crypt_positions = [
            i for i, (_, block) in enumerate(image.entries)
            if (des.extract_word(block) >> 26) == isa.OP_CRYPT
        ]
        if not crypt_positions:
            raise NoCryptInstruction()
        if len(crypt_positions) > 1:
            raise MultipleCryptInstructions()
        boundary = crypt_positions[0] + 1
    sched = des.key_schedule(key)
    entries = [
        (addr, des.encrypt_block(block, sched) if i >= boundary else block)
        for i, (addr, block) in enumerate(image.entries)
    ]
    return ProgramImage(entries=entries, symbols=dict(image.symbols),
                        crypt_boundary=boundary)


_HEX_LINE_RE = re.compile(r"^[0-9a-fA-F]{16}$")


def write_hex(image: ProgramImage) -> str:
    """One 16-hex-digit block per line; `@addr` directives mark gaps."""
    lines = []
    next_addr = 0
    for addr, block in image.entries:
        if addr != next_addr:
            lines.append(f"@{addr:x}")
        lines.append(f"{block:016x}")
        next_addr = addr + 8
    return "\n".join(lines) + ("\n" if lines else "")


def read_hex(text: str) -> ProgramImage:
    """Inverse of write_hex; accepts `#` comments and blank lines."""
    entries: List[Tuple[int, int]] = []
    addr = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            try:
                addr = int(line[1:], 16)
            except ValueError:
                raise UnalignedAddressDirective(
                    f"bad address directive '{line}'", lineno) from None
            if addr % 8 != 0:
                raise UnalignedAddressDirective(
                    f"address directive '{line}' not 8-aligned", lineno)
            continue
        if not _HEX_LINE_RE.match(line):
            raise BadHexLine(f"expected 16 hex digits, got '{line}'", lineno)
        entries.append((addr, int(line, 16)))
        addr += 8
    return ProgramImage(entries=entries)
