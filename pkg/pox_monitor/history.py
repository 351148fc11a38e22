"""
Metadata register history recorded alongside a trace.

The trace file carries only the ten per-cycle wire columns; projecting it
again needs the ER/OR bounds active at each cycle. They are stored in a
sidecar "<trace>.meta.json" holding the layout and every change of the
register file (EXEC excluded, it is in the trace already).
"""

import bisect
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Tuple, Union

from mcu_machine.layout import DEFAULT_LAYOUT, MemoryLayout

from pox_monitor.metadata import MetadataRegisters


def sidecar_path(trace_path: Union[str, Path]) -> Path:
    trace_path = Path(trace_path)
    return trace_path.with_name(trace_path.name + ".meta.json")


@dataclass
class MetadataHistory:
    """(cycle, registers) pairs; an entry applies from its cycle onwards."""

    entries: List[Tuple[int, MetadataRegisters]] = field(default_factory=list)

    def record(self, cycle: int, md: MetadataRegisters) -> bool:
        md = replace(md, exec=0)
        if self.entries and self.entries[-1][1] == md:
            return False
        if self.entries and self.entries[-1][0] == cycle:
            self.entries[-1] = (cycle, md)
        else:
            self.entries.append((cycle, md))
        return True

    def at(self, cycle: int) -> MetadataRegisters:
        idx = bisect.bisect_right([c for c, _ in self.entries], cycle) - 1
        if idx < 0:
            return MetadataRegisters()
        return self.entries[idx][1]

    def segments(self, n_cycles: int) -> List[Tuple[int, int, MetadataRegisters]]:
        """[start, end) cycle spans with constant registers, covering [0, n_cycles)."""
        spans = []
        points = [(0, MetadataRegisters())] + self.entries
        for i, (start, md) in enumerate(points):
            end = points[i + 1][0] if i + 1 < len(points) else n_cycles
            if start < end:
                spans.append((start, min(end, n_cycles), md))
        return spans


def write_sidecar(trace_path: Union[str, Path], layout: MemoryLayout, history: MetadataHistory) -> Path:
    path = sidecar_path(trace_path)
    doc = {
        "layout": {name: [rng.start, rng.end] for name, rng in layout.regions().items()},
        "metadata": [
            {
                "cycle": cycle,
                "er_min": md.er_min,
                "er_max": md.er_max,
                "or_min": md.or_min,
                "or_max": md.or_max,
                "chal": md.chal.hex(),
            }
            for cycle, md in history.entries
        ],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_sidecar(trace_path: Union[str, Path]) -> Tuple[MemoryLayout, MetadataHistory]:
    """Layout and history for a trace; defaults when no sidecar exists."""
    path = sidecar_path(trace_path)
    if not path.exists():
        return DEFAULT_LAYOUT, MetadataHistory()
    doc = json.loads(path.read_text(encoding="utf-8"))
    layout = DEFAULT_LAYOUT.with_overrides(
        {name: {"start": lo, "end": hi} for name, (lo, hi) in doc.get("layout", {}).items()}
    )
    history = MetadataHistory()
    for item in doc.get("metadata", []):
        history.entries.append(
            (
                int(item["cycle"]),
                MetadataRegisters(
                    er_min=item["er_min"],
                    er_max=item["er_max"],
                    or_min=item["or_min"],
                    or_max=item["or_max"],
                    chal=bytes.fromhex(item["chal"]),
                ),
            )
        )
    return layout, history
