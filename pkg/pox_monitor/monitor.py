"""
The composed PoX monitor: seven sub-modules ticked on the same abstract input,
EXEC being the AND of their outputs.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from mcu_machine.layout import MemoryLayout
from mcu_machine.trace import SignalSnapshot

from pox_monitor.fsm import NOT_EXEC, SubmoduleTable, builtin_tables
from pox_monitor.inputs import AbstractInput, project
from pox_monitor.metadata import MetadataRegisters


@dataclass(frozen=True)
class MonitorState:
    """States of the sub-modules (in table order) and the composed EXEC bit."""

    states: Tuple[str, ...]
    exec: int = 0

    def state_of(self, name: str, tables: Sequence[SubmoduleTable]) -> str:
        for table, state in zip(tables, self.states):
            if table.name == name:
                return state
        raise KeyError(name)


def initial_state(tables: Sequence[SubmoduleTable] = ()) -> MonitorState:
    tables = tables or builtin_tables()
    return MonitorState(states=tuple(t.initial for t in tables), exec=0)


class PoxMonitor:
    """Stateful wrapper used by the simulated device; one per device."""

    def __init__(self, tables: Optional[Sequence[SubmoduleTable]] = None):
        self.tables: Tuple[SubmoduleTable, ...] = tuple(tables or builtin_tables())
        self.state = initial_state(self.tables)
        self._memo: Dict[Tuple[Tuple[str, ...], AbstractInput], MonitorState] = {}

    def advance(self, inp: AbstractInput) -> int:
        """Tick every sub-module on inp; returns the composed EXEC bit."""
        key = (self.state.states, inp)
        nxt = self._memo.get(key)
        if nxt is None:
            nxt = step_states(self.tables, self.state.states, inp)
            self._memo[key] = nxt
        self.state = nxt
        return nxt.exec

    def reset_state(self) -> None:
        self.state = initial_state(self.tables)

    def submodule_exec(self) -> Dict[str, int]:
        return {t.name: int(s != NOT_EXEC) for t, s in zip(self.tables, self.state.states)}


def step_states(tables: Sequence[SubmoduleTable], states: Tuple[str, ...], inp: AbstractInput) -> MonitorState:
    nxt = tuple(table.next_state(state, inp) for table, state in zip(tables, states))
    return MonitorState(states=nxt, exec=int(all(s != NOT_EXEC for s in nxt)))


def tick(
    ms: MonitorState,
    snapshot: SignalSnapshot,
    md: MetadataRegisters,
    layout: MemoryLayout,
    tables: Sequence[SubmoduleTable] = (),
) -> Tuple[MonitorState, int]:
    """Pure monitor step; backfills snapshot.exec with the composed output."""
    tables = tables or builtin_tables()
    nxt = step_states(tables, ms.states, project(snapshot, md, layout))
    snapshot.exec = nxt.exec
    return nxt, nxt.exec
