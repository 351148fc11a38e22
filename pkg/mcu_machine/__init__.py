"""
MCU simulator

Cycle-level emulator of the prover device: toy ISA, assembler, DMA/IRQ/reset
scripts, memory-mapped GPIO and per-cycle wire snapshots.
"""

from mcu_machine.assembler import Program, assemble, read_symbol_map, write_program
from mcu_machine.errors import AssemblyError, LayoutError, MachineError, MachineHalted, TraceFormatError
from mcu_machine.events import DmaEvent, DmaScript, EventScript, IrqEvent, IrqScript, ResetEvent, ResetScript
from mcu_machine.isa import INSTRUCTION_SIZE, Instruction, InvalidInstruction, Opcode, decode, disassemble
from mcu_machine.layout import DEFAULT_LAYOUT, AddressRange, MemoryLayout
from mcu_machine.machine import AccessKind, AccessOutcome, Machine, MachineState, RomCycle
from mcu_machine.peripherals import GpioPort
from mcu_machine.trace import SignalSnapshot, read_trace, write_trace

__all__ = [
    "AccessKind",
    "AccessOutcome",
    "AddressRange",
    "AssemblyError",
    "DEFAULT_LAYOUT",
    "DmaEvent",
    "DmaScript",
    "EventScript",
    "GpioPort",
    "INSTRUCTION_SIZE",
    "Instruction",
    "InvalidInstruction",
    "IrqEvent",
    "IrqScript",
    "LayoutError",
    "Machine",
    "MachineError",
    "MachineHalted",
    "MachineState",
    "MemoryLayout",
    "Opcode",
    "Program",
    "ResetEvent",
    "ResetScript",
    "RomCycle",
    "SignalSnapshot",
    "TraceFormatError",
    "assemble",
    "decode",
    "disassemble",
    "read_symbol_map",
    "read_trace",
    "write_program",
    "write_trace",
]

__version__ = "0.1.0"
