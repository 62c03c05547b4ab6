"""Architectural state: register file, key register, block-addressed memory.

Memories are byte addressed but only ever accessed in aligned 64-bit blocks
(address multiple of 8). Within a block the byte at address a is bits 7..0,
i.e. little-endian for byte-level inspection.
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Tuple

from . import asm

WORD_MASK = 0xFFFFFFFF
BLOCK_MASK = 0xFFFFFFFFFFFFFFFF


class MachineError(Exception):
    pass


class UnalignedAccess(MachineError):
    def __init__(self, addr: int):
        self.addr = addr
        super().__init__(f"unaligned 64-bit access at address {addr:#x}")


class KeyNotLoaded(MachineError):
    def __init__(self, what: str = "key register incomplete"):
        super().__init__(what)


class RegisterFile:
    """32 general registers; register 0 is hardwired to zero."""

    def __init__(self):
        self._regs: List[int] = [0] * 32

    def read(self, index: int) -> int:
        return self._regs[index]

    def write(self, index: int, value: int) -> None:
        if index != 0:
            self._regs[index] = value & WORD_MASK

    def snapshot(self) -> Tuple[int, ...]:
        return tuple(self._regs)


class KeyRegister:
    """Two 32-bit halves of the DES key, loaded independently by lklw/lkuw.

    Once both halves are set the value persists until a half is reloaded.
    """

    def __init__(self):
        self.lower = 0
        self.upper = 0
        self.lower_loaded = False
        self.upper_loaded = False

    def set_lower(self, value: int) -> None:
        self.lower = value & WORD_MASK
        self.lower_loaded = True

    def set_upper(self, value: int) -> None:
        self.upper = value & WORD_MASK
        self.upper_loaded = True

    @property
    def loaded(self) -> bool:
        return self.lower_loaded and self.upper_loaded

    def key_value(self) -> int:
        if not self.loaded:
            raise KeyNotLoaded()
        return (self.upper << 32) | self.lower


class Memory:
    """Sparse block store. Unwritten aligned addresses read as zero;
    extent (highest loaded address + 8) marks where instruction fetch stops.
    """

    def __init__(self):
        self._blocks: dict[int, int] = {}
        self.extent = 0

    @staticmethod
    def _aligned(addr: int) -> int:
        if addr % 8 != 0:
            raise UnalignedAccess(addr)
        return addr

    def read_block(self, addr: int) -> int:
        return self._blocks.get(self._aligned(addr), 0)

    def write_block(self, addr: int, block: int) -> None:
        self._blocks[self._aligned(addr)] = block & BLOCK_MASK
        if addr + 8 > self.extent:
            self.extent = addr + 8

    def items(self) -> List[Tuple[int, int]]:
        return sorted(self._blocks.items())


def load_image(mem: Memory, image) -> None:
    """Place an image's blocks at their byte addresses (later blocks win).

    Accepts a ProgramImage or hex image text.
    """
    if isinstance(image, str):
        image = asm.read_hex(image)
    for addr, block in image.entries:
        mem.write_block(addr, block)


def format_registers(rf: RegisterFile, indices: Optional[Iterable[int]] = None) -> str:
    """One register per line: `r4 = 0xcba767ee`."""
    if indices is None:
        indices = range(32)
    return "\n".join(f"r{i} = 0x{rf.read(i):08x}" for i in indices)


def format_memory(mem: Memory, ranges: Iterable[Tuple[int, int]]) -> str:
    """One block per line: `38: 10539160018d5ff7` (addresses in hex)."""
    lines = []
    for start, stop in ranges:
        if start % 8 != 0:
            raise UnalignedAccess(start)
        for addr in range(start, stop, 8):
            lines.append(f"{addr:x}: {mem.read_block(addr):016x}")
    return "\n".join(lines)
