"""
Projection of a wire snapshot onto the monitor's abstract input bits.
"""

from typing import Dict, Iterable, NamedTuple

from mcu_machine.isa import INSTRUCTION_SIZE
from mcu_machine.layout import MemoryLayout
from mcu_machine.trace import SignalSnapshot

from pox_monitor.metadata import MetadataRegisters


class AbstractInput(NamedTuple):
    pc_in_er: bool = False
    pc_eq_ermin: bool = False
    pc_eq_ermax: bool = False
    pc_in_cr: bool = False
    pc_eq_crmin: bool = False
    irq: bool = False
    reset: bool = False
    dma_en: bool = False
    w_er: bool = False
    dma_er: bool = False
    w_or: bool = False
    dma_or: bool = False
    w_meta: bool = False
    dma_meta: bool = False
    bounds_valid: bool = True
    er_cr_disjoint: bool = True


INPUT_BITS = AbstractInput._fields

# (antecedent, consequent): antecedent set implies consequent set
_IMPLICATIONS = (
    ("pc_eq_ermin", "pc_in_er"),
    ("pc_eq_ermax", "pc_in_er"),
    ("pc_eq_crmin", "pc_in_cr"),
    ("dma_er", "dma_en"),
    ("dma_or", "dma_en"),
    ("dma_meta", "dma_en"),
)

# a reset cycle drives no other wire
_RESET_EXCLUDES = ("irq", "dma_en", "w_er", "w_or", "w_meta", "dma_er", "dma_or", "dma_meta")


def consistent(bits: Dict[str, bool]) -> bool:
    """Structural consistency of a (possibly partial) input assignment.

    Constraints only apply when every bit they mention is assigned.
    """
    for a, b in _IMPLICATIONS:
        if a in bits and b in bits and bits[a] and not bits[b]:
            return False
    if bits.get("reset"):
        if any(bits.get(name) for name in _RESET_EXCLUDES):
            return False
    if bits.get("pc_in_er") and bits.get("pc_in_cr") and bits.get("er_cr_disjoint") is True:
        return False
    return True


class Projector:
    """project() specialised to one (metadata, layout) pair."""

    def __init__(self, md: MetadataRegisters, layout: MemoryLayout):
        self.md = md
        self.layout = layout
        self._er = (md.er_min, md.er_max)
        self._or = md.or_range()
        self._cr = (layout.cr.start, layout.cr.end)
        self._meta = (layout.metadata.start, layout.metadata.end)
        self._exec_addr = layout.exec_addr
        self._bounds_valid = md.bounds_valid
        self._disjoint = md.er_cr_disjoint(layout)

    def _in_er(self, addr: int) -> bool:
        return self._er[0] <= addr <= self._er[1]

    def _in_or(self, addr: int) -> bool:
        return self._or is not None and self._or[0] <= addr <= self._or[1]

    def _in_meta(self, addr: int) -> bool:
        return self._meta[0] <= addr <= self._meta[1] and addr != self._exec_addr

    def __call__(self, snap: SignalSnapshot) -> AbstractInput:
        pc = snap.pc
        er_min, er_max = self._er
        in_er = er_min <= pc <= er_max
        w = bool(snap.w_en)
        dma = bool(snap.dma_en)
        return AbstractInput(
            pc_in_er=in_er,
            pc_eq_ermin=in_er and pc == er_min,
            pc_eq_ermax=in_er and er_max <= pc + INSTRUCTION_SIZE - 1,
            pc_in_cr=self._cr[0] <= pc <= self._cr[1],
            pc_eq_crmin=pc == self._cr[0],
            irq=bool(snap.irq),
            reset=bool(snap.reset),
            dma_en=dma,
            w_er=w and self._in_er(snap.d_addr),
            dma_er=dma and self._in_er(snap.dma_addr),
            w_or=w and self._in_or(snap.d_addr),
            dma_or=dma and self._in_or(snap.dma_addr),
            w_meta=w and self._in_meta(snap.d_addr),
            dma_meta=dma and self._in_meta(snap.dma_addr),
            bounds_valid=self._bounds_valid,
            er_cr_disjoint=self._disjoint,
        )


def project(snapshot: SignalSnapshot, md: MetadataRegisters, layout: MemoryLayout) -> AbstractInput:
    """Abstract input bits for one cycle; pure."""
    return Projector(md, layout)(snapshot)


def as_dict(inp: AbstractInput, names: Iterable[str] = INPUT_BITS) -> Dict[str, bool]:
    return {name: getattr(inp, name) for name in names}
