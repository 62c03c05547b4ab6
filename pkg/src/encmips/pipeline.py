"""Cycle-accurate 5-stage pipeline (IF ID EX MEM WB) over the machine state.

Fetch decrypts instruction blocks while crypt mode is on; stores encrypt
their data block. Data hazards are handled by EX forwarding from the EXMEM
and MEMWB latches plus a one-cycle load-use stall; branches resolve in ID
(write-before-read register file + EXMEM forwarding) and squash one fetch
slot when taken, as does a crypt-mode change.

Bubbles in the latches are tagged with why they exist (pipeline fill,
stall, flush, end of program). A stall or flush is charged to the
statistics when its bubble drains past WB, and the run halts when the
first end-of-program bubble reaches the WB latch. Under that accounting
    cycles == retired + stalls + flushes + 4
holds exactly for every halting run, even when a squashed slot falls
inside the final drain.

A single-cycle reference interpreter with identical architectural
semantics serves as the correctness oracle.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

from . import des, isa, machine

WORD_MASK = 0xFFFFFFFF

FILL = "fill"
STALL = "stall"
FLUSH = "flush"
END = "end"


class Fault(Exception):
    """An execution fault; halts the run with a diagnostic."""

    def __init__(self, cause: Exception, pc: int, cycle: int):
        self.cause = cause
        self.pc = pc
        self.cycle = cycle
        super().__init__(f"fault at pc 0x{pc:x} (cycle {cycle}): {cause}")


class CycleLimitExceeded(Exception):
    """The run hit max_cycles without draining; distinct from a clean halt."""

    def __init__(self, state, limit: int):
        self.state = state
        self.limit = limit
        super().__init__(f"no halt within {limit} cycles")


@dataclass
class Bubble:
    kind: str


@dataclass
class IfSlot:
    pc: int
    word: int


@dataclass
class IdSlot:
    pc: int
    instr: isa.Instruction
    a: int           # rs value at decode time
    b: int           # rt value at decode time
    crypt_mode: bool  # mode snapshot at decode, used by MEM


@dataclass
class ExSlot:
    pc: int
    instr: isa.Instruction
    alu: int
    store_data: int
    crypt_mode: bool


@dataclass
class WbSlot:
    pc: int
    instr: isa.Instruction
    value: int


LatchValue = Union[Bubble, IfSlot, IdSlot, ExSlot, WbSlot]


@dataclass
class Stats:
    cycles: int = 0
    retired: int = 0
    stalls: int = 0
    flushes: int = 0
    crypt_fetches: int = 0
    encrypted_stores: int = 0

    def cpi(self) -> Optional[float]:
        return self.cycles / self.retired if self.retired else None


@dataclass
class CycleEvents:
    """What one clock cycle did, for tracing."""

    cycle: int
    pc: int
    if_slot: Optional[LatchValue] = None
    id_slot: Optional[LatchValue] = None
    ex_slot: Optional[LatchValue] = None
    mem_slot: Optional[LatchValue] = None
    wb_slot: Optional[LatchValue] = None
    stall: bool = False
    flush: bool = False
    crypt_change: Optional[bool] = None
    dec_fetch: bool = False
    enc_store: bool = False


class CpuState:
    """All architectural and microarchitectural state of one core."""

    def __init__(self, imem: Optional[machine.Memory] = None,
                 dmem: Optional[machine.Memory] = None, *,
                 decrypt_loads: bool = False,
                 crypt_fetch: bool = True,
                 record_retired: bool = False):
        self.imem = imem if imem is not None else machine.Memory()
        self.dmem = dmem if dmem is not None else machine.Memory()
        self.regs = machine.RegisterFile()
        self.keyreg = machine.KeyRegister()
        self.pc = 0
        self.crypt_mode = False
        self.decrypt_loads = decrypt_loads
        # crypt_fetch=False runs a plaintext image with the fetch-side
        # decryptor disabled (store encryption still applies); used to
        # check that instruction encryption is timing-transparent.
        self.crypt_fetch = crypt_fetch
        self.ifid: LatchValue = Bubble(FILL)
        self.idex: LatchValue = Bubble(FILL)
        self.exmem: LatchValue = Bubble(FILL)
        self.memwb: LatchValue = Bubble(FILL)
        self.stats = Stats()
        self.halted = False
        self.retired_log: Optional[List[Tuple[int, int]]] = \
            [] if record_retired else None
        self._sched_key: Optional[int] = None
        self._sched: Optional[des.KeySchedule] = None

    def key_sched(self) -> Optional[des.KeySchedule]:
        """Current key schedule, or None while the key register is partial."""
        if not self.keyreg.loaded:
            return None
        value = self.keyreg.key_value()
        if value != self._sched_key:
            self._sched_key = value
            self._sched = des.key_schedule(value)
        return self._sched


_R_ARITH = ("add", "sub", "and", "or", "slt")
_MEM_OPS = ("lw", "sw", "lklw", "lkuw")


def instr_sources(instr: isa.Instruction) -> Tuple[int, ...]:
    """Register indices the instruction reads."""
    mn = instr.mnemonic
    if mn in _R_ARITH or mn in ("sw", "beq", "bne"):
        return (instr.rs, instr.rt)
    if mn == "sll":
        return (instr.rt,)
    if mn in ("addi", "lw", "lklw", "lkuw"):
        return (instr.rs,)
    return ()


def instr_dest(instr: isa.Instruction) -> Optional[int]:
    """Register the instruction writes back, if any."""
    mn = instr.mnemonic
    if mn in _R_ARITH or mn == "sll":
        return instr.rd
    if mn in ("addi", "lw"):
        return instr.rt
    return None


def is_mem_read(instr: isa.Instruction) -> bool:
    return instr.mnemonic in ("lw", "lklw", "lkuw")


def forward_value(reg: int, fallback: int,
                  exmem: LatchValue, memwb: LatchValue) -> int:
    """Pick the freshest available value for a register: EXMEM result,
    else MEMWB writeback, else the value read from the register file."""
    if isinstance(exmem, ExSlot):
        dest = instr_dest(exmem.instr)
        if dest is not None and dest != 0 and dest == reg:
            return exmem.alu
    if isinstance(memwb, WbSlot):
        dest = instr_dest(memwb.instr)
        if dest is not None and dest != 0 and dest == reg:
            return memwb.value
    return fallback


def detect_hazards(instr: isa.Instruction,
                   idex: LatchValue, exmem: LatchValue) -> bool:
    """Stall decision for the instruction currently in ID.

    Load-use: a memory read in EX whose destination this instruction needs.
    Branches additionally wait for any producer still in EX (its result
    lands in EXMEM next cycle, in reach of the compare's forwarding) and
    for a load still in MEM (its data lands in the register file via the
    write-before-read port one cycle later).
    """
    sources = instr_sources(instr)
    if not sources:
        return False
    if isinstance(idex, IdSlot) and is_mem_read(idex.instr):
        dest = instr_dest(idex.instr)
        if dest is not None and dest != 0 and dest in sources:
            return True
    if instr.mnemonic in ("beq", "bne"):
        if isinstance(idex, IdSlot):
            dest = instr_dest(idex.instr)
            if dest is not None and dest != 0 and dest in sources:
                return True
        if isinstance(exmem, ExSlot) and is_mem_read(exmem.instr):
            dest = instr_dest(exmem.instr)
            if dest is not None and dest != 0 and dest in sources:
                return True
    return False


def resolve_branch(instr: isa.IType, pc: int, regs: machine.RegisterFile,
                   exmem: LatchValue) -> Tuple[bool, int]:
    """Compare in ID and produce (taken, target byte address)."""
    a = forward_value(instr.rs, regs.read(instr.rs), exmem, None)
    b = forward_value(instr.rt, regs.read(instr.rt), exmem, None)
    taken = (a == b) if instr.mnemonic == "beq" else (a != b)
    return taken, pc + 8 + instr.imm * 8


def fetch_word(imem: machine.Memory, pc: int, decrypt: bool,
               sched: Optional[des.KeySchedule]) -> Optional[int]:
    """IF-stage read: the 32-bit payload at pc, decrypted when crypt mode
    routes the fetch through the decryption core. None past imem's extent."""
    if pc >= imem.extent:
        return None
    block = imem.read_block(pc)
    if decrypt:
        if sched is None:
            raise machine.KeyNotLoaded("decrypting fetch before key loaded")
        block = des.decrypt_block(block, sched)
    return des.extract_word(block)


def mem_stage(instr: isa.Instruction, addr: int, store_data: int,
              crypt_mode: bool, sched: Optional[des.KeySchedule],
              dmem: machine.Memory, decrypt_loads: bool = False) -> Optional[int]:
    """MEM-stage access. Returns lw's loaded word, the 32-bit half for
    lklw/lkuw (the caller routes it into the key register), else None.

    Stores under crypt mode write the DES encryption of the zero-padded
    word. Loads return the low 32 bits of the block as-is unless the
    decrypt_loads path is enabled.
    """
    mn = instr.mnemonic
    if mn == "sw":
        if crypt_mode:
            if sched is None:
                raise machine.KeyNotLoaded("encrypted store before key loaded")
            dmem.write_block(addr, des.encrypt_block(des.pad_word(store_data), sched))
        else:
            dmem.write_block(addr, des.pad_word(store_data))
        return None
    block = dmem.read_block(addr)
    if mn == "lw" and decrypt_loads and crypt_mode:
        if sched is None:
            raise machine.KeyNotLoaded("decrypting load before key loaded")
        block = des.decrypt_block(block, sched)
    return des.extract_word(block)


def _to_signed(value: int) -> int:
    return value - 0x100000000 if value & 0x80000000 else value


def _alu(instr: isa.Instruction, a: int, b: int) -> int:
    mn = instr.mnemonic
    if mn == "add":
        return (a + b) & WORD_MASK
    if mn == "sub":
        return (a - b) & WORD_MASK
    if mn == "and":
        return a & b
    if mn == "or":
        return a | b
    if mn == "slt":
        return 1 if _to_signed(a) < _to_signed(b) else 0
    if mn == "sll":
        return (b << instr.shamt) & WORD_MASK
    if mn in ("addi",) or mn in _MEM_OPS:
        return (a + instr.imm) & WORD_MASK
    return 0  # branches/jumps/crypt carry no ALU result


_decode = functools.lru_cache(maxsize=4096)(isa.decode)


def step(state: CpuState) -> CycleEvents:
    """Advance one clock cycle; all stages work from start-of-cycle latches."""
    st = state.stats
    st.cycles += 1
    ifid, idex, exmem, memwb = state.ifid, state.idex, state.exmem, state.memwb
    ev = CycleEvents(cycle=st.cycles, pc=state.pc, id_slot=ifid, ex_slot=idex,
                     mem_slot=exmem, wb_slot=memwb)

    # WB: commit to the register file first so ID reads see it (internal
    # write-before-read forwarding).
    if isinstance(memwb, WbSlot):
        dest = instr_dest(memwb.instr)
        if dest is not None:
            state.regs.write(dest, memwb.value)
        st.retired += 1
        if state.retired_log is not None:
            state.retired_log.append((memwb.pc, isa.encode(memwb.instr)))
    elif isinstance(memwb, Bubble):
        if memwb.kind == STALL:
            st.stalls += 1
        elif memwb.kind == FLUSH:
            st.flushes += 1

    # MEM. Key-register halves commit at the end of the cycle, after IF has
    # sampled the old value (the hardware latches the half on the clock edge).
    pending_key: Optional[Tuple[str, int]] = None
    if isinstance(exmem, ExSlot):
        instr = exmem.instr
        value = exmem.alu
        if instr.mnemonic in _MEM_OPS:
            try:
                out = mem_stage(instr, exmem.alu, exmem.store_data,
                                exmem.crypt_mode, state.key_sched(),
                                state.dmem, state.decrypt_loads)
            except machine.MachineError as exc:
                raise Fault(exc, exmem.pc, st.cycles) from exc
            if instr.mnemonic == "lw":
                value = out
            elif instr.mnemonic == "lklw":
                pending_key = ("lower", out)
            elif instr.mnemonic == "lkuw":
                pending_key = ("upper", out)
            elif exmem.crypt_mode:
                st.encrypted_stores += 1
                ev.enc_store = True
        next_memwb: LatchValue = WbSlot(exmem.pc, instr, value)
    else:
        next_memwb = exmem

    # EX
    if isinstance(idex, IdSlot):
        instr = idex.instr
        mn = instr.mnemonic
        a, b, store_data = idex.a, idex.b, 0
        if mn in _R_ARITH:
            a = forward_value(instr.rs, a, exmem, memwb)
            b = forward_value(instr.rt, b, exmem, memwb)
        elif mn == "sll":
            b = forward_value(instr.rt, b, exmem, memwb)
        elif mn in ("addi", "lw", "lklw", "lkuw"):
            a = forward_value(instr.rs, a, exmem, memwb)
        elif mn == "sw":
            a = forward_value(instr.rs, a, exmem, memwb)
            store_data = forward_value(instr.rt, b, exmem, memwb)
        next_exmem: LatchValue = ExSlot(idex.pc, instr, _alu(instr, a, b),
                                        store_data, idex.crypt_mode)
    else:
        next_exmem = idex

    # ID: decode, hazard detection, branch resolution, crypt-mode switch.
    stall = False
    redirect: Optional[int] = None
    if isinstance(ifid, IfSlot):
        try:
            instr = _decode(ifid.word)
        except isa.UnknownInstruction as exc:
            raise Fault(exc, ifid.pc, st.cycles) from exc
        stall = detect_hazards(instr, idex, exmem)
        if stall:
            ev.stall = True
            next_idex: LatchValue = Bubble(STALL)
        else:
            mn = instr.mnemonic
            if mn in ("beq", "bne"):
                taken, target = resolve_branch(instr, ifid.pc, state.regs, exmem)
                if taken:
                    redirect = target
            elif mn == "j":
                redirect = instr.target * 8
            elif mn == "crypt":
                enable = instr.target != 0
                if enable != state.crypt_mode:
                    state.crypt_mode = enable
                    ev.crypt_change = enable
                    if state.crypt_fetch:
                        # the slot fetched this cycle went through the wrong
                        # path; squash it and refetch at the same pc
                        redirect = state.pc
            a = state.regs.read(instr.rs) if not isinstance(instr, isa.JType) else 0
            b = state.regs.read(instr.rt) if not isinstance(instr, isa.JType) else 0
            next_idex = IdSlot(ifid.pc, instr, a, b, state.crypt_mode)
    else:
        next_idex = ifid

    # IF
    if stall:
        next_ifid = ifid
        next_pc = state.pc
    elif redirect is not None:
        ev.flush = True
        next_ifid = Bubble(FLUSH)
        next_pc = redirect
    else:
        decrypt = state.crypt_mode and state.crypt_fetch
        try:
            word = fetch_word(state.imem, state.pc, decrypt, state.key_sched())
        except machine.KeyNotLoaded as exc:
            raise Fault(exc, state.pc, st.cycles) from exc
        if word is None:
            next_ifid = Bubble(END)
            next_pc = state.pc
        else:
            if decrypt:
                st.crypt_fetches += 1
                ev.dec_fetch = True
            next_ifid = IfSlot(state.pc, word)
            next_pc = state.pc + 8

    state.ifid, state.idex = next_ifid, next_idex
    state.exmem, state.memwb = next_exmem, next_memwb
    state.pc = next_pc
    if pending_key is not None:
        half, value = pending_key
        if half == "lower":
            state.keyreg.set_lower(value)
        else:
            state.keyreg.set_upper(value)
    state.halted = isinstance(next_memwb, Bubble) and next_memwb.kind == END
    ev.if_slot = next_ifid
    return ev


def run(state: CpuState, max_cycles: int = 100_000,
        trace: Optional[Callable[[str], None]] = None) -> Tuple[CpuState, Stats]:
    """Step until the pipeline drains past the end of instruction memory.

    Raises Fault on an execution fault and CycleLimitExceeded when the
    program does not halt within max_cycles.
    """
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    while not state.halted:
        if state.stats.cycles >= max_cycles:
            raise CycleLimitExceeded(state, max_cycles)
        ev = step(state)
        if trace is not None:
            trace(format_trace_line(ev))
    return state, state.stats


def _slot_text(slot: LatchValue) -> str:
    if isinstance(slot, Bubble):
        return "bubble"
    if isinstance(slot, IfSlot):
        return isa.disasm_word(slot.word)
    return isa.disassemble(slot.instr)


def format_trace_line(ev: CycleEvents) -> str:
    events = []
    if ev.stall:
        events.append("STALL")
    if ev.flush:
        events.append("FLUSH")
    if ev.crypt_change is not None:
        events.append("CRYPT_ON" if ev.crypt_change else "CRYPT_OFF")
    if ev.dec_fetch:
        events.append("DEC_FETCH")
    if ev.enc_store:
        events.append("ENC_STORE")
    return (f"{ev.cycle} | {ev.pc:x} | IF:{_slot_text(ev.if_slot)} "
            f"ID:{_slot_text(ev.id_slot)} EX:{_slot_text(ev.ex_slot)} "
            f"MEM:{_slot_text(ev.mem_slot)} WB:{_slot_text(ev.wb_slot)} "
            f"| events: {' '.join(events)}")


@dataclass
class InterpState:
    """Final architectural state of a reference interpretation."""

    regs: machine.RegisterFile = field(default_factory=machine.RegisterFile)
    keyreg: machine.KeyRegister = field(default_factory=machine.KeyRegister)
    dmem: machine.Memory = field(default_factory=machine.Memory)
    crypt_mode: bool = False
    executed: int = 0
    retired_log: Optional[List[Tuple[int, int]]] = None


def reference_interpret(imem: machine.Memory, dmem: machine.Memory, *,
                        decrypt_loads: bool = False,
                        max_steps: int = 100_000,
                        record_retired: bool = False) -> InterpState:
    """Execute a plaintext program one instruction at a time, no pipeline.

    Architectural semantics match the pipelined model exactly: crypt flips
    the mode flag (stores encrypt from then on; fetches read the image
    as-is since it is already plaintext), lklw/lkuw load key halves.
    """
    s = InterpState(dmem=dmem)
    if record_retired:
        s.retired_log = []
    sched: Optional[des.KeySchedule] = None
    sched_for = None
    pc = 0
    while pc < imem.extent:
        if s.executed >= max_steps:
            raise CycleLimitExceeded(s, max_steps)
        word = des.extract_word(imem.read_block(pc))
        try:
            instr = _decode(word)
        except isa.UnknownInstruction as exc:
            raise Fault(exc, pc, s.executed) from exc
        mn = instr.mnemonic
        next_pc = pc + 8
        try:
            if mn in _R_ARITH or mn == "sll":
                a = s.regs.read(instr.rs)
                b = s.regs.read(instr.rt)
                s.regs.write(instr.rd, _alu(instr, a, b))
            elif mn == "addi":
                s.regs.write(instr.rt, _alu(instr, s.regs.read(instr.rs), 0))
            elif mn in _MEM_OPS:
                addr = _alu(instr, s.regs.read(instr.rs), 0)
                if s.keyreg.loaded:
                    value = s.keyreg.key_value()
                    if value != sched_for:
                        sched_for = value
                        sched = des.key_schedule(value)
                else:
                    sched = None
                out = mem_stage(instr, addr, s.regs.read(instr.rt),
                                s.crypt_mode, sched, s.dmem, decrypt_loads)
                if mn == "lw":
                    s.regs.write(instr.rt, out)
                elif mn == "lklw":
                    s.keyreg.set_lower(out)
                elif mn == "lkuw":
                    s.keyreg.set_upper(out)
            elif mn in ("beq", "bne"):
                a = s.regs.read(instr.rs)
                b = s.regs.read(instr.rt)
                taken = (a == b) if mn == "beq" else (a != b)
                if taken:
                    next_pc = pc + 8 + instr.imm * 8
            elif mn == "j":
                next_pc = instr.target * 8
            else:  # crypt
                s.crypt_mode = instr.target != 0
        except machine.MachineError as exc:
            raise Fault(exc, pc, s.executed) from exc
        s.executed += 1
        if s.retired_log is not None:
            s.retired_log.append((pc, word))
        pc = next_pc
    return s


def architectural_state(state) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, int], ...],
                                        Tuple[bool, bool, int, int], bool]:
    """Comparable snapshot (registers, dmem, key register, crypt mode) of a
    CpuState or InterpState."""
    kr = state.keyreg
    return (state.regs.snapshot(),
            tuple(state.dmem.items()),
            (kr.lower_loaded, kr.upper_loaded, kr.lower, kr.upper),
            state.crypt_mode)
