"""
PoX hardware monitor

Seven Mealy sub-modules over abstract input bits, the METADATA register file
and the transition tables they are built from.
"""

from pox_monitor.fsm import (
    NOT_EXEC,
    Rule,
    SubmoduleTable,
    TableFormatError,
    builtin_table,
    builtin_tables,
    export_tables,
    load_table,
    parse_guard,
    parse_table,
    tick_submodule,
)
from pox_monitor.history import MetadataHistory, read_sidecar, sidecar_path, write_sidecar
from pox_monitor.inputs import INPUT_BITS, AbstractInput, Projector, consistent, project
from pox_monitor.metadata import (
    CHAL_SIZE,
    OR_BOTTOM,
    REGISTER_FILE_SIZE,
    MetadataRegisters,
    field_bytes,
    write_metadata,
)
from pox_monitor.monitor import MonitorState, PoxMonitor, initial_state, step_states, tick

__all__ = [
    "AbstractInput",
    "CHAL_SIZE",
    "INPUT_BITS",
    "MetadataHistory",
    "MetadataRegisters",
    "MonitorState",
    "NOT_EXEC",
    "OR_BOTTOM",
    "PoxMonitor",
    "Projector",
    "REGISTER_FILE_SIZE",
    "Rule",
    "SubmoduleTable",
    "TableFormatError",
    "builtin_table",
    "builtin_tables",
    "consistent",
    "export_tables",
    "field_bytes",
    "initial_state",
    "load_table",
    "parse_guard",
    "parse_table",
    "project",
    "read_sidecar",
    "sidecar_path",
    "step_states",
    "tick",
    "tick_submodule",
    "write_metadata",
    "write_sidecar",
]

__version__ = "0.1.0"
