"""
Two-pass assembler for the toy ISA.

Syntax, one statement per line:
    label:                  ; labels may share a line with an instruction
    MOVI r0, 42             ; registers r0..r3, numbers in decimal, 0x.. or 0b..
    STORE r0, out+1         ; label or .equ name with optional +/- offset
    .equ P4IN, 0x1C         ; named constant
Comments start with ';' or '#'.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from mcu_machine.errors import AssemblyError
from mcu_machine.isa import INSTRUCTION_SIZE, NUM_REGS, OPERAND_SHAPE, Instruction, Opcode
from mcu_machine.layout import DEFAULT_LAYOUT, AddressRange

_LABEL = re.compile(r"^([A-Za-z_.][\w.]*)\s*:\s*(.*)$")
_NAME = re.compile(r"^[A-Za-z_.][\w.]*$")
_EXPR = re.compile(r"^([A-Za-z_.][\w.]*|0[xX][0-9a-fA-F]+|0[bB][01]+|\d+)\s*(?:([+-])\s*(0[xX][0-9a-fA-F]+|\d+))?$")


@dataclass
class Program:
    """Assembled image plus its symbol table."""

    image: bytes
    origin: int
    symbols: Dict[str, int] = field(default_factory=dict)

    @property
    def end(self) -> int:
        """Address of the last byte."""
        return self.origin + len(self.image) - 1

    @property
    def entry(self) -> int:
        return self.symbols["entry"]

    @property
    def exit(self) -> int:
        return self.symbols["exit"]


@dataclass
class _Statement:
    line: int
    mnemonic: str
    operands: List[str]


def _strip(line: str) -> str:
    for marker in (";", "#"):
        idx = line.find(marker)
        if idx >= 0:
            line = line[:idx]
    return line.strip()


def _number(text: str) -> Optional[int]:
    try:
        return int(text, 0)
    except ValueError:
        return None


def _parse(source: str) -> Tuple[List[_Statement], Dict[int, List[Tuple[str, int]]], Dict[str, Tuple[str, int]]]:
    """First pass: statements, labels pending at each statement index, .equ definitions."""
    statements: List[_Statement] = []
    labels_at: Dict[int, List[Tuple[str, int]]] = {}
    equs: Dict[str, Tuple[str, int]] = {}

    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = _strip(raw)
        while text:
            m = _LABEL.match(text)
            if not m:
                break
            labels_at.setdefault(len(statements), []).append((m.group(1), lineno))
            text = m.group(2).strip()
        if not text:
            continue

        head, _, rest = text.replace("\t", " ").partition(" ")
        operands = [op.strip() for op in rest.split(",")] if rest.strip() else []
        if head.lower() == ".equ":
            if len(operands) != 2 or not _NAME.match(operands[0]):
                raise AssemblyError(".equ expects NAME, VALUE", lineno)
            equs[operands[0]] = (operands[1], lineno)
            continue
        statements.append(_Statement(lineno, head.upper(), operands))

    return statements, labels_at, equs


def assemble(source: str, origin: int = 0, region: Optional[AddressRange] = None) -> Program:
    """Assemble source text placed at origin.

    The symbol table always carries "entry" (first instruction) and "exit"
    (last instruction) unless the source defines them itself. An image whose
    origin lies in the default program region must also end inside it, unless
    another region is given.
    """
    if region is None and origin in DEFAULT_LAYOUT.prog:
        region = DEFAULT_LAYOUT.prog
    statements, labels_at, equs = _parse(source)

    symbols: Dict[str, int] = {}
    for index, entries in labels_at.items():
        for name, lineno in entries:
            if name in symbols or name in equs:
                raise AssemblyError(f"duplicate label {name!r}", lineno)
            addr = origin + index * INSTRUCTION_SIZE
            symbols[name] = addr

    constants: Dict[str, int] = {}

    def resolve(expr: str, lineno: int, depth: int = 0) -> int:
        m = _EXPR.match(expr.strip())
        if not m:
            raise AssemblyError(f"bad operand {expr!r}", lineno)
        base, sign, offset = m.groups()
        value = _number(base)
        if value is None:
            if base in symbols:
                value = symbols[base]
            elif base in constants:
                value = constants[base]
            elif base in equs and depth < 8:
                value = resolve(equs[base][0], equs[base][1], depth + 1)
                constants[base] = value
            else:
                raise AssemblyError(f"unresolved label {base!r}", lineno)
        if sign:
            delta = int(offset, 0)
            value = value + delta if sign == "+" else value - delta
        if not 0 <= value <= 0xFFFF:
            raise AssemblyError(f"operand {expr!r} out of 16-bit range", lineno)
        return value

    def register(text: str, lineno: int) -> int:
        t = text.strip().lower()
        if len(t) == 2 and t[0] == "r" and t[1].isdigit() and int(t[1]) < NUM_REGS:
            return int(t[1])
        raise AssemblyError(f"expected register r0..r{NUM_REGS - 1}, got {text!r}", lineno)

    instructions: List[Instruction] = []
    for st in statements:
        try:
            opcode = Opcode[st.mnemonic]
        except KeyError:
            raise AssemblyError(f"unknown mnemonic {st.mnemonic!r}", st.line) from None
        shape = OPERAND_SHAPE[opcode]
        expected = {"": 0, "i": 1, "ri": 2, "rr": 2}[shape]
        if len(st.operands) != expected:
            raise AssemblyError(f"{opcode.name} takes {expected} operand(s)", st.line)
        if shape == "":
            ins = Instruction(opcode)
        elif shape == "i":
            ins = Instruction(opcode, imm=resolve(st.operands[0], st.line))
        elif shape == "rr":
            ins = Instruction(opcode, register(st.operands[0], st.line), register(st.operands[1], st.line))
        else:
            ins = Instruction(opcode, register(st.operands[0], st.line), imm=resolve(st.operands[1], st.line))
        instructions.append(ins)

    image = b"".join(ins.encode() for ins in instructions)
    last = origin + len(image) - 1
    if region is not None:
        if image and not region.covers(origin, last):
            raise AssemblyError(f"image [0x{origin:04X},0x{last:04X}] exceeds region {region}")
    elif last > 0xFFFF:
        raise AssemblyError("image exceeds the address space")

    symbols.setdefault("entry", origin)
    symbols.setdefault("exit", origin + max(len(image) - INSTRUCTION_SIZE, 0))
    return Program(image=image, origin=origin, symbols=symbols)


def write_program(program: Program, path: Union[str, Path]) -> Path:
    """Write the raw image and a sidecar "<path>.sym" with name=hex-address lines."""
    path = Path(path)
    path.write_bytes(program.image)
    sym = path.with_name(path.name + ".sym")
    lines = [f"{name}=0x{addr:04X}" for name, addr in sorted(program.symbols.items(), key=lambda kv: (kv[1], kv[0]))]
    sym.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return sym


def read_symbol_map(path: Union[str, Path]) -> Dict[str, int]:
    symbols: Dict[str, int] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        if not sep:
            raise AssemblyError(f"expected name=address, got {line!r}", lineno)
        symbols[name.strip()] = int(value.strip(), 16)
    return symbols
