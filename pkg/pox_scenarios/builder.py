"""
Lay out an ER program with one entry at er_min and one exit at er_max.

The source is assembled at er_min. Every RET becomes a jump to the unified
exit, a RET in the last instruction slot of ER, and the gap between the body
and the exit is filled with NOPs. Control flow must stay inside ER: the
monitor clears EXEC whenever pc leaves ER anywhere but er_max, so calls and
jumps to outside code are refused here instead of failing at run time.
"""

import logging
from typing import List, Tuple

from mcu_machine.assembler import Program, assemble
from mcu_machine.errors import AssemblyError
from mcu_machine.isa import INSTRUCTION_SIZE, Instruction, Opcode, decode_image, encode_all
from mcu_machine.layout import DEFAULT_LAYOUT, MemoryLayout

from pox_scenarios.errors import BuildError

logger = logging.getLogger(__name__)

Bounds = Tuple[int, int]


def _body(source: str, er_min: int, layout: MemoryLayout = DEFAULT_LAYOUT) -> Tuple[Program, List[Instruction]]:
    try:
        assembled = assemble(source, origin=er_min, region=layout.prog if er_min in layout.prog else None)
    except AssemblyError as e:
        raise BuildError(f"assembly failed: {e}") from e
    body = [ins for _, ins in decode_image(assembled.image, er_min)]
    if not body:
        raise BuildError("program is empty")
    # a trailing RET falls through the padding into the unified exit
    if body[-1].opcode is Opcode.RET:
        body.pop()
    return assembled, body


def required_size(source: str) -> int:
    """Bytes of ER the built program needs, its exit included."""
    _, body = _body(source, 0)
    return (len(body) + 1) * INSTRUCTION_SIZE


def _rewrite(ins: Instruction, addr: int, er: Bounds, exit_addr: int) -> Instruction:
    er_min, er_max = er
    op = ins.opcode
    if op is Opcode.RET:
        return Instruction(Opcode.JMP, imm=exit_addr)
    if op is Opcode.CALL:
        if er_min <= ins.imm <= er_max:
            raise BuildError(f"CALL 0x{ins.imm:04X} at 0x{addr:04X}: RET is reserved for the unified exit")
        raise BuildError(
            f"CALL 0x{ins.imm:04X} at 0x{addr:04X} runs code outside ER; "
            "pc would leave ER before er_max and break atomicity"
        )
    if op in (Opcode.JMP, Opcode.JZ):
        if not er_min <= ins.imm <= er_max:
            raise BuildError(
                f"{op.name} 0x{ins.imm:04X} at 0x{addr:04X} leaves ER; "
                "pc would leave ER before er_max and break atomicity"
            )
        if (ins.imm - er_min) % INSTRUCTION_SIZE:
            raise BuildError(f"{op.name} 0x{ins.imm:04X} at 0x{addr:04X} is not instruction-aligned")
    if op is Opcode.HALT:
        raise BuildError(f"HALT at 0x{addr:04X} stops inside ER; leave through RET")
    if op is Opcode.RETI:
        raise BuildError(f"RETI at 0x{addr:04X}: ER code is not an interrupt handler")
    return ins


def build_program(source: str, er: Bounds, layout: MemoryLayout = DEFAULT_LAYOUT) -> Program:
    """Assemble source into er with a single entry and a single exit."""
    er_min, er_max = er
    size = er_max - er_min + 1
    if size <= 0 or size % INSTRUCTION_SIZE:
        raise BuildError(f"ER [0x{er_min:04X},0x{er_max:04X}] must span a positive multiple of {INSTRUCTION_SIZE} bytes")
    if not layout.prog.covers(er_min, er_max):
        raise BuildError(f"ER [0x{er_min:04X},0x{er_max:04X}] is not inside prog {layout.prog}")

    assembled, body = _body(source, er_min, layout)
    slots = size // INSTRUCTION_SIZE
    if len(body) + 1 > slots:
        raise BuildError(f"program needs {(len(body) + 1) * INSTRUCTION_SIZE} bytes but ER holds {size}")

    exit_addr = er_max - INSTRUCTION_SIZE + 1
    code = [_rewrite(ins, er_min + i * INSTRUCTION_SIZE, er, exit_addr) for i, ins in enumerate(body)]
    code += [Instruction(Opcode.NOP)] * (slots - 1 - len(code))
    code.append(Instruction(Opcode.RET))

    symbols = dict(assembled.symbols)
    symbols["entry"] = er_min
    symbols["exit"] = exit_addr
    logger.debug("built %d instructions into ER [0x%04X,0x%04X]", len(body) + 1, er_min, er_max)
    return Program(image=encode_all(code), origin=er_min, symbols=symbols)


def fit_program(source: str, er_min: int, layout: MemoryLayout = DEFAULT_LAYOUT) -> Program:
    """build_program into the smallest ER starting at er_min."""
    return build_program(source, (er_min, er_min + required_size(source) - 1), layout)
