"""
Exceptions raised by the MCU simulator.

Access-control outcomes (deny-and-reset, ignore) are not exceptions; they are
part of the machine's behaviour and show up in the trace.
"""


class MachineError(Exception):
    """Base class for simulator errors."""


class LayoutError(MachineError):
    """The memory layout breaks a disjointness or bounds rule."""


class AssemblyError(MachineError):
    """Source text could not be assembled."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class MachineHalted(MachineError):
    """step() was called on a halted machine with no pending DMA/IRQ event."""


class TraceFormatError(MachineError):
    """A trace file line could not be parsed."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")
