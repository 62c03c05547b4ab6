"""Command-line front end: assemble, run, raw DES blocks, image dumps.

Dumps and hex output are lowercase hex; addresses in dumps carry no 0x
prefix. Numeric arguments accept decimal or 0x-prefixed hex. Trace output
goes to standard error so machine-readable standard output stays stable.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from . import asm, des, isa, machine, pipeline


def _parse_hex16(text: str) -> int:
    value = text[2:] if text.lower().startswith("0x") else text
    if len(value) != 16:
        raise ValueError(f"expected 16 hex digits, got '{text}'")
    return int(value, 16)


def _parse_int(text: str) -> int:
    return int(text, 0)


def _parse_reg_list(text: str) -> List[int]:
    regs = []
    for part in text.split(","):
        part = part.strip().lstrip("$")
        if part.lower().startswith("r"):
            part = part[1:]
        index = int(part, 0)
        if not 0 <= index <= 31:
            raise ValueError(f"no such register r{index}")
        regs.append(index)
    return regs


def _parse_mem_ranges(text: str) -> List[Tuple[int, int]]:
    ranges = []
    for part in text.split(","):
        start, _, stop = part.partition(":")
        ranges.append((_parse_int(start.strip()), _parse_int(stop.strip())))
    return ranges


def cmd_asm(args) -> int:
    source = Path(args.source).read_text()
    try:
        if args.encrypt and args.key is None:
            print("error: --encrypt requires --key", file=sys.stderr)
            return 1
        key = _parse_hex16(args.key) if args.key is not None else None
        image = asm.build_image(source, auto_nop=args.auto_nop)
        if args.encrypt:
            image = asm.encrypt_image(image, key)
    except (asm.AsmError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(args.output) if args.output else Path(args.source).with_suffix(".hex")
    out.write_text(asm.write_hex(image))
    for name, addr in sorted(image.symbols.items(), key=lambda kv: kv[1]):
        print(f"{name} = {addr:x}")
    if image.crypt_boundary is not None:
        print(f"crypt boundary = {image.crypt_boundary}")
    return 0


def _print_stats(stats: pipeline.Stats) -> None:
    cpi = stats.cpi()
    print(f"cycles = {stats.cycles}")
    print(f"retired = {stats.retired}")
    print(f"stalls = {stats.stalls}")
    print(f"flushes = {stats.flushes}")
    print(f"cpi = {cpi:.4f}" if cpi is not None else "cpi = n/a")


def _print_dumps(state: pipeline.CpuState, args) -> None:
    if args.dump_regs:
        print(machine.format_registers(state.regs, args.dump_regs))
    if args.dump_mem:
        print(machine.format_memory(state.dmem, args.dump_mem))


def cmd_run(args) -> int:
    imem = machine.Memory()
    machine.load_image(imem, Path(args.image).read_text())
    dmem = machine.Memory()
    if args.dmem:
        machine.load_image(dmem, Path(args.dmem).read_text())
    state = pipeline.CpuState(imem, dmem, decrypt_loads=args.decrypt_loads)
    trace = (lambda line: print(line, file=sys.stderr)) if args.trace else None
    code = 0
    try:
        pipeline.run(state, max_cycles=args.max_cycles, trace=trace)
    except pipeline.Fault as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    except pipeline.CycleLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 3
    _print_stats(state.stats)
    _print_dumps(state, args)
    return code


def cmd_des(args) -> int:
    try:
        key = _parse_hex16(args.key)
        block = _parse_hex16(args.block)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sched = des.key_schedule(key)
    op = des.encrypt_block if args.operation == "encrypt" else des.decrypt_block
    print(f"{op(block, sched):016x}")
    return 0


def cmd_dump(args) -> int:
    try:
        image = asm.read_hex(Path(args.image).read_text())
    except asm.AsmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for addr, block in image.entries:
        line = f"{addr:x}: {block:016x}"
        if args.disasm:
            line += f"  {isa.disasm_word(des.extract_word(block))}"
        print(line)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="encmips",
        description="assembler and pipeline simulator for the encrypted "
                    "MIPS instruction set")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asm", help="assemble a source file into a hex image")
    p.add_argument("source")
    p.add_argument("-o", "--output", help="output path (default: source with .hex)")
    p.add_argument("--encrypt", action="store_true",
                   help="DES-encrypt every block after the crypt instruction")
    p.add_argument("--key", type=str, default=None, help="16-hex-digit DES key")
    p.add_argument("--auto-nop", action="store_true",
                   help="insert the two guard nops between key load and crypt")
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("run", help="run an instruction image to completion")
    p.add_argument("image", help="instruction memory hex image")
    p.add_argument("--dmem", help="data memory hex image")
    p.add_argument("--max-cycles", type=_parse_int, default=100_000)
    p.add_argument("--trace", action="store_true",
                   help="per-cycle pipeline trace on standard error")
    p.add_argument("--decrypt-loads", action="store_true",
                   help="route lw data through the decryption core in crypt mode")
    p.add_argument("--dump-regs", type=_parse_reg_list, default=None,
                   metavar="LIST", help="registers to dump, e.g. r4,r7")
    p.add_argument("--dump-mem", type=_parse_mem_ranges, default=None,
                   metavar="RANGES", help="byte ranges to dump, e.g. 56:64")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("des", help="encrypt or decrypt one 64-bit block")
    p.add_argument("operation", choices=("encrypt", "decrypt"))
    p.add_argument("--key", required=True, help="16-hex-digit DES key")
    p.add_argument("--block", required=True, help="16-hex-digit block")
    p.set_defaults(func=cmd_des)

    p = sub.add_parser("dump", help="pretty-print a hex image")
    p.add_argument("image")
    p.add_argument("--disasm", action="store_true",
                   help="disassemble each block's payload word")
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
