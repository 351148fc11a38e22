"""
Challenger-side record of genuine executions.

The game needs ground truth the verifier never sees: did S actually run
from er_min to er_max, uninterrupted and unmodified, after the challenge
was issued, and what did it leave in OR? The witness watches the raw wires
against the requested ER and OR, independent of METADATA and the monitor.
"""

from typing import List, Optional, Tuple

from mcu_machine.isa import INSTRUCTION_SIZE
from mcu_machine.machine import Machine
from mcu_machine.trace import SignalSnapshot

Bounds = Tuple[int, int]


class ExecutionWitness:
    """Machine observer collecting the OR contents at the end of each genuine run."""

    def __init__(self, machine: Machine, s: bytes, er: Bounds, or_: Optional[Bounds]):
        self.machine = machine
        self.s = bytes(s)
        self.er = er
        self.or_ = or_
        self.runs: List[bytes] = []
        self._active = False

    def _clean(self, snap: SignalSnapshot) -> bool:
        lo, hi = self.er
        if not lo <= snap.pc <= hi or snap.irq or snap.reset or snap.dma_en:
            return False
        return not (snap.w_en and lo <= snap.d_addr <= hi)

    def _output(self) -> bytes:
        if self.or_ is None:
            return b""
        lo, hi = self.or_
        return self.machine.peek(lo, hi - lo + 1)

    def __call__(self, snap: SignalSnapshot) -> None:
        lo, hi = self.er
        clean = self._clean(snap)
        if clean and snap.pc == lo:
            # entry cycle already executed; no write hit ER, so ER is as it was
            self._active = self.machine.peek(lo, hi - lo + 1) == self.s
        elif not clean:
            self._active = False
        if self._active and snap.pc + INSTRUCTION_SIZE - 1 >= hi:
            self.runs.append(self._output())
            self._active = False

    @property
    def executed(self) -> bool:
        return bool(self.runs)

    @property
    def output(self) -> Optional[bytes]:
        """OR contents after the latest genuine run, or None without one."""
        return self.runs[-1] if self.runs else None

    def attach(self) -> "ExecutionWitness":
        self.machine.observers.append(self)
        return self

    def detach(self) -> None:
        if self in self.machine.observers:
            self.machine.observers.remove(self)
