"""
Scheduled DMA, interrupt and reset events.

An event fires at its scheduled cycle. When a higher-priority event occupies
that cycle (reset > DMA > IRQ) it fires at the next free cycle instead. DMA
and interrupts also wait while the core writes the second byte of a push.
"""

import bisect
from dataclasses import dataclass, field
from typing import Generic, Iterable, List, Literal, Optional, TypeVar


@dataclass(frozen=True, order=True)
class DmaEvent:
    fire_cycle: int
    op: Literal["read", "write"] = "write"
    addr: int = 0
    value: int = 0


@dataclass(frozen=True, order=True)
class IrqEvent:
    fire_cycle: int
    vector: int = 0


@dataclass(frozen=True, order=True)
class ResetEvent:
    fire_cycle: int


E = TypeVar("E", DmaEvent, IrqEvent, ResetEvent)


@dataclass
class EventScript(Generic[E]):
    """Time-ordered queue of events of one kind."""

    events: List[E] = field(default_factory=list)

    def __post_init__(self):
        self.events = sorted(self.events)

    def add(self, event: E) -> None:
        bisect.insort(self.events, event)

    def extend(self, events: Iterable[E]) -> None:
        for event in events:
            self.add(event)

    def due(self, cycle: int) -> Optional[E]:
        if self.events and self.events[0].fire_cycle <= cycle:
            return self.events[0]
        return None

    def pop(self) -> E:
        return self.events.pop(0)

    def __len__(self) -> int:
        return len(self.events)


DmaScript = EventScript[DmaEvent]
IrqScript = EventScript[IrqEvent]
ResetScript = EventScript[ResetEvent]
