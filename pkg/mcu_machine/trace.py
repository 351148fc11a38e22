"""
Per-cycle wire snapshots and their JSON-Lines persistence.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Union

from mcu_machine.errors import TraceFormatError

TRACE_KEYS = ("cycle", "pc", "r_en", "w_en", "d_addr", "dma_en", "dma_addr", "irq", "reset", "exec")
_BITS = ("r_en", "w_en", "dma_en", "irq", "reset", "exec")
_ADDRS = ("pc", "d_addr", "dma_addr")


@dataclass(slots=True)
class SignalSnapshot:
    """Values of the monitored wires in one cycle. exec is backfilled by the monitor."""

    cycle: int
    pc: int
    r_en: int = 0
    w_en: int = 0
    d_addr: int = 0
    dma_en: int = 0
    dma_addr: int = 0
    irq: int = 0
    reset: int = 0
    exec: int = 0

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in TRACE_KEYS}, separators=(", ", ": "))


def snapshot_from_dict(obj: dict, line: int = 0) -> SignalSnapshot:
    if not isinstance(obj, dict):
        raise TraceFormatError("expected a JSON object", line)
    keys = set(obj)
    if keys != set(TRACE_KEYS):
        missing = sorted(set(TRACE_KEYS) - keys)
        extra = sorted(keys - set(TRACE_KEYS))
        raise TraceFormatError(f"bad keys (missing {missing}, unexpected {extra})", line)
    for key in TRACE_KEYS:
        value = obj[key]
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise TraceFormatError(f"{key} must be an unsigned integer", line)
        if key in _BITS and value not in (0, 1):
            raise TraceFormatError(f"{key} must be 0 or 1", line)
        if key in _ADDRS and value > 0xFFFF:
            raise TraceFormatError(f"{key} exceeds 16 bits", line)
    return SignalSnapshot(**obj)


def write_trace(path: Union[str, Path], snapshots: Iterable[SignalSnapshot]) -> int:
    """Write one object per line; returns the number of cycles written."""
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for snap in snapshots:
            f.write(snap.to_json())
            f.write("\n")
            count += 1
    return count


def iter_trace(path: Union[str, Path]) -> Iterator[SignalSnapshot]:
    expected_cycle = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceFormatError(f"invalid JSON: {e.msg}", lineno) from e
            snap = snapshot_from_dict(obj, lineno)
            if expected_cycle is not None and snap.cycle != expected_cycle:
                raise TraceFormatError(
                    f"cycle {snap.cycle} does not follow {expected_cycle - 1}", lineno
                )
            expected_cycle = snap.cycle + 1
            yield snap


def read_trace(path: Union[str, Path]) -> List[SignalSnapshot]:
    return list(iter_trace(path))
