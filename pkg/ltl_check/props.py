"""
Proposition traces: one boolean column per proposition, one row per cycle.

Columns derived from a device trace are the monitor's abstract input bits,
the composed exec bit, and the Modify_Mem predicates

    mod_er   = w_er | dma_er
    mod_or   = w_or | dma_or
    mod_meta = w_meta | dma_meta

DMA reads count as modifications: the dma wires do not say which way data
moves, so a read is indistinguishable from a write at the monitor.
"""

from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

from mcu_machine.layout import DEFAULT_LAYOUT, MemoryLayout
from mcu_machine.trace import SignalSnapshot, read_trace

from pox_monitor.history import MetadataHistory, read_sidecar
from pox_monitor.inputs import INPUT_BITS, Projector

from ltl_check.errors import UnknownProposition

DERIVED_PROPS = ("exec", "mod_er", "mod_or", "mod_meta")
TRACE_PROPS = tuple(INPUT_BITS) + DERIVED_PROPS


class PropTrace:
    """Total assignment of every named proposition at every position."""

    def __init__(self, columns: Mapping[str, Sequence[bool]], cycles: Optional[Sequence[int]] = None):
        lengths = {len(col) for col in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns differ in length: {sorted(lengths)}")
        self.length = lengths.pop() if lengths else 0
        self.columns: Dict[str, List[bool]] = {name: [bool(v) for v in col] for name, col in columns.items()}
        self.cycles = list(cycles) if cycles is not None else list(range(self.length))
        if len(self.cycles) != self.length:
            raise ValueError("cycle column does not match the trace length")

    def __len__(self) -> int:
        return self.length

    @property
    def names(self) -> List[str]:
        return sorted(self.columns)

    def column(self, name: str) -> List[bool]:
        try:
            return self.columns[name]
        except KeyError:
            raise UnknownProposition(name) from None

    def row(self, pos: int) -> Dict[str, bool]:
        return {name: col[pos] for name, col in self.columns.items()}

    def cycle_at(self, pos: int) -> int:
        return self.cycles[pos]

    def prefix(self, length: int) -> "PropTrace":
        return PropTrace({n: c[:length] for n, c in self.columns.items()}, self.cycles[:length])

    def extend(self, rows: Sequence[Mapping[str, bool]]) -> "PropTrace":
        """Copy with rows appended; every row must assign every column."""
        columns = {n: list(c) for n, c in self.columns.items()}
        for row in rows:
            for name in columns:
                columns[name].append(bool(row[name]))
        last = self.cycles[-1] + 1 if self.cycles else 0
        return PropTrace(columns, self.cycles + list(range(last, last + len(rows))))

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, bool]], names: Optional[Sequence[str]] = None) -> "PropTrace":
        names = list(names) if names is not None else (sorted(rows[0]) if rows else [])
        return cls({name: [bool(row[name]) for row in rows] for name in names})

    @classmethod
    def from_snapshots(
        cls,
        snapshots: Sequence[SignalSnapshot],
        history: Optional[MetadataHistory] = None,
        layout: MemoryLayout = DEFAULT_LAYOUT,
    ) -> "PropTrace":
        """Project each cycle through the metadata active at that cycle."""
        history = history or MetadataHistory()
        columns: Dict[str, List[bool]] = {name: [] for name in TRACE_PROPS}
        if not snapshots:
            return cls(columns, [])
        base = snapshots[0].cycle
        for start, end, md in history.segments(base + len(snapshots)):
            project = Projector(md, layout)
            for snap in snapshots[max(start - base, 0) : max(end - base, 0)]:
                inp = project(snap)
                for name in INPUT_BITS:
                    columns[name].append(getattr(inp, name))
                columns["exec"].append(bool(snap.exec))
                columns["mod_er"].append(inp.w_er or inp.dma_er)
                columns["mod_or"].append(inp.w_or or inp.dma_or)
                columns["mod_meta"].append(inp.w_meta or inp.dma_meta)
        return cls(columns, [s.cycle for s in snapshots])

    @classmethod
    def from_device(cls, device) -> "PropTrace":
        """Trace recorded by a PoxDevice (which keeps its own metadata history)."""
        return cls.from_snapshots(device.trace, device.history, device.layout)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "PropTrace":
        """A JSON-Lines trace plus its metadata sidecar, when present."""
        layout, history = read_sidecar(path)
        return cls.from_snapshots(read_trace(path), history, layout)
