"""
The toy instruction set: twelve opcodes, fixed 4-byte encoding, one cycle each
except CALL, whose push takes two.

Encoding: byte 0 opcode, byte 1 (ra << 4) | rb, bytes 2..3 imm16 little-endian.
Fields an opcode does not use must be zero.
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, List, Tuple

from mcu_machine.errors import MachineError

INSTRUCTION_SIZE = 4
NUM_REGS = 4


class Opcode(IntEnum):
    HALT = 0x00
    NOP = 0x01
    MOVI = 0x02
    LOAD = 0x03
    STORE = 0x04
    ADD = 0x05
    SUB = 0x06
    JMP = 0x07
    JZ = 0x08
    CALL = 0x09
    RET = 0x0A
    RETI = 0x0B


# operand shape per opcode: "" none, "ri" register+imm, "rr" two registers, "i" imm only
OPERAND_SHAPE = {
    Opcode.HALT: "",
    Opcode.NOP: "",
    Opcode.RET: "",
    Opcode.RETI: "",
    Opcode.MOVI: "ri",
    Opcode.LOAD: "ri",
    Opcode.STORE: "ri",
    Opcode.JZ: "ri",
    Opcode.ADD: "rr",
    Opcode.SUB: "rr",
    Opcode.JMP: "i",
    Opcode.CALL: "i",
}

BRANCHES = frozenset({Opcode.JMP, Opcode.JZ, Opcode.CALL})
EXITS = frozenset({Opcode.RET, Opcode.HALT})


class InvalidInstruction(MachineError):
    """Four bytes that do not decode to an instruction."""


@dataclass(frozen=True)
class Instruction:
    opcode: Opcode
    ra: int = 0
    rb: int = 0
    imm: int = 0

    def encode(self) -> bytes:
        return bytes(
            (int(self.opcode), (self.ra << 4) | self.rb, self.imm & 0xFF, (self.imm >> 8) & 0xFF)
        )

    @property
    def target(self) -> int:
        """Branch/call target or memory operand."""
        return self.imm

    def __str__(self) -> str:
        shape = OPERAND_SHAPE[self.opcode]
        name = self.opcode.name
        if shape == "":
            return name
        if shape == "rr":
            return f"{name} r{self.ra}, r{self.rb}"
        if shape == "i":
            return f"{name} 0x{self.imm:04X}"
        if self.opcode is Opcode.MOVI:
            return f"{name} r{self.ra}, {self.imm}"
        return f"{name} r{self.ra}, 0x{self.imm:04X}"


def decode(raw: bytes) -> Instruction:
    """Decode exactly one 4-byte instruction."""
    if len(raw) != INSTRUCTION_SIZE:
        raise InvalidInstruction(f"need {INSTRUCTION_SIZE} bytes, got {len(raw)}")
    op_byte, regs, lo, hi = raw
    try:
        opcode = Opcode(op_byte)
    except ValueError:
        raise InvalidInstruction(f"unknown opcode 0x{op_byte:02X}") from None
    ra, rb, imm = regs >> 4, regs & 0x0F, lo | (hi << 8)
    shape = OPERAND_SHAPE[opcode]
    uses_ra = shape in ("ri", "rr")
    uses_rb = shape == "rr"
    uses_imm = shape in ("ri", "i")
    if (ra and not uses_ra) or (rb and not uses_rb) or (imm and not uses_imm):
        raise InvalidInstruction(f"{opcode.name} with non-zero unused field")
    if ra >= NUM_REGS or rb >= NUM_REGS:
        raise InvalidInstruction(f"register index out of range in {raw.hex()}")
    return Instruction(opcode, ra, rb, imm)


def decode_image(image: bytes, origin: int = 0) -> List[Tuple[int, Instruction]]:
    """Decode a whole image into (address, instruction) pairs."""
    if len(image) % INSTRUCTION_SIZE:
        raise InvalidInstruction(f"image length {len(image)} is not a multiple of {INSTRUCTION_SIZE}")
    return [
        (origin + off, decode(image[off : off + INSTRUCTION_SIZE]))
        for off in range(0, len(image), INSTRUCTION_SIZE)
    ]


def disassemble(image: bytes) -> str:
    """One instruction per line."""
    return "\n".join(str(ins) for _, ins in decode_image(image))


def encode_all(instructions: Iterable[Instruction]) -> bytes:
    return b"".join(ins.encode() for ins in instructions)
