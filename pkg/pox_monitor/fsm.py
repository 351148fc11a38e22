"""
Table-driven Mealy sub-modules.

A table file lists a header and one transition per line:

    name: metadata
    id: 6
    states: NotExec Run
    initial: NotExec
    inputs: pc_eq_ermin w_meta dma_meta
    Run | w_meta | NotExec | 0
    Run | otherwise | Run | 1

Rules are tried top to bottom; the first whose guard (a conjunction of
possibly negated input bits) holds fires. Every state ends with an
"otherwise" rule, so each table is input-total. The exec column must equal
(next-state != NotExec).
"""

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from pox_monitor.inputs import INPUT_BITS

NOT_EXEC = "NotExec"
OTHERWISE = "otherwise"

Guard = Tuple[Tuple[str, bool], ...]


class TableFormatError(ValueError):
    """A transition table file is malformed."""

    def __init__(self, message: str, line: int = 0, source: str = "<table>"):
        self.line = line
        super().__init__(f"{source}:{line}: {message}" if line else f"{source}: {message}")


def parse_guard(text: str) -> Guard:
    text = text.strip()
    if text == OTHERWISE:
        return ()
    literals = []
    for part in text.split("&"):
        part = part.strip()
        negated = part.startswith("!")
        name = part[1:].strip() if negated else part
        if not name:
            raise ValueError(f"empty literal in guard {text!r}")
        literals.append((name, not negated))
    return tuple(literals)


def format_guard(guard: Guard) -> str:
    if not guard:
        return OTHERWISE
    return " & ".join(name if value else f"!{name}" for name, value in guard)


@dataclass(frozen=True)
class Rule:
    state: str
    guard: Guard
    next_state: str
    exec_bit: int

    def matches(self, bits: Mapping[str, bool]) -> bool:
        return all(bool(bits[name]) == value for name, value in self.guard)

    def __str__(self) -> str:
        return f"{self.state} | {format_guard(self.guard)} | {self.next_state} | {self.exec_bit}"


@dataclass(frozen=True)
class SubmoduleTable:
    id: int
    name: str
    states: Tuple[str, ...]
    initial: str
    inputs: Tuple[str, ...]
    rules: Tuple[Rule, ...]
    _cache: Dict[Tuple[str, Tuple[bool, ...]], str] = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if NOT_EXEC not in self.states:
            raise TableFormatError(f"{self.name}: states must include {NOT_EXEC}")
        if self.initial not in self.states:
            raise TableFormatError(f"{self.name}: unknown initial state {self.initial}")
        unknown = [b for b in self.inputs if b not in INPUT_BITS]
        if unknown:
            raise TableFormatError(f"{self.name}: unknown input bits {unknown}")
        for rule in self.rules:
            if rule.state not in self.states or rule.next_state not in self.states:
                raise TableFormatError(f"{self.name}: rule {rule} names an unknown state")
            for name, _ in rule.guard:
                if name not in self.inputs:
                    raise TableFormatError(f"{self.name}: rule {rule} uses undeclared input {name}")
            if rule.exec_bit != int(rule.next_state != NOT_EXEC):
                raise TableFormatError(f"{self.name}: rule {rule} has an inconsistent exec bit")
        for state in self.states:
            own = [r for r in self.rules if r.state == state]
            if not own or own[-1].guard:
                raise TableFormatError(f"{self.name}: state {state} must end with an '{OTHERWISE}' rule")

    def next_state(self, state: str, bits: Union[Mapping[str, bool], Sequence[bool]]) -> str:
        """Transition for one input; bits is a mapping or an AbstractInput."""
        if isinstance(bits, Mapping):
            values = tuple(bool(bits[name]) for name in self.inputs)
        else:
            values = tuple(bool(getattr(bits, name)) for name in self.inputs)
        key = (state, values)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        assignment = dict(zip(self.inputs, values))
        for rule in self.rules:
            if rule.state == state and rule.matches(assignment):
                self._cache[key] = rule.next_state
                return rule.next_state
        raise TableFormatError(f"{self.name}: no rule for state {state}")

    def output(self, state: str) -> int:
        return int(state != NOT_EXEC)

    def with_rule(self, index: int, rule: Rule) -> "SubmoduleTable":
        """Copy with rule `index` replaced; used to plant mutations."""
        rules = list(self.rules)
        rules[index] = rule
        return replace(self, rules=tuple(rules), _cache={})

    def find_rule(self, state: str, guard: str) -> int:
        wanted = parse_guard(guard)
        for i, rule in enumerate(self.rules):
            if rule.state == state and rule.guard == wanted:
                return i
        raise KeyError(f"{self.name}: no rule {state} | {guard}")

    def to_text(self) -> str:
        lines = [
            f"name: {self.name}",
            f"id: {self.id}",
            f"states: {' '.join(self.states)}",
            f"initial: {self.initial}",
            f"inputs: {' '.join(self.inputs)}",
        ]
        lines.extend(str(rule) for rule in self.rules)
        return "\n".join(lines) + "\n"


def parse_table(text: str, source: str = "<table>") -> SubmoduleTable:
    header: Dict[str, str] = {}
    rules: List[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "|" in line:
            cols = [c.strip() for c in line.split("|")]
            if len(cols) != 4:
                raise TableFormatError("expected 'state | guard | next-state | exec-bit'", lineno, source)
            state, guard_text, nxt, bit = cols
            if bit not in ("0", "1"):
                raise TableFormatError(f"exec bit must be 0 or 1, got {bit!r}", lineno, source)
            try:
                guard = parse_guard(guard_text)
            except ValueError as e:
                raise TableFormatError(str(e), lineno, source) from e
            rules.append(Rule(state, guard, nxt, int(bit)))
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise TableFormatError(f"unrecognised line {line!r}", lineno, source)
        header[key.strip()] = value.strip()

    missing = [k for k in ("name", "id", "states", "initial", "inputs") if k not in header]
    if missing:
        raise TableFormatError(f"missing header fields {missing}", source=source)
    return SubmoduleTable(
        id=int(header["id"]),
        name=header["name"],
        states=tuple(header["states"].split()),
        initial=header["initial"],
        inputs=tuple(header["inputs"].split()),
        rules=tuple(rules),
    )


def load_table(path: Union[str, Path]) -> SubmoduleTable:
    path = Path(path)
    return parse_table(path.read_text(encoding="utf-8"), source=str(path))


_BUILTIN: Optional[Tuple[SubmoduleTable, ...]] = None


def builtin_tables() -> Tuple[SubmoduleTable, ...]:
    """The seven sub-module tables shipped with the package, ordered by id."""
    global _BUILTIN
    if _BUILTIN is None:
        folder = resources.files("pox_monitor") / "tables"
        tables = [
            parse_table(entry.read_text(encoding="utf-8"), source=entry.name)
            for entry in folder.iterdir()
            if entry.name.endswith(".fsm")
        ]
        _BUILTIN = tuple(sorted(tables, key=lambda t: t.id))
    return _BUILTIN


def builtin_table(key: Union[int, str]) -> SubmoduleTable:
    for table in builtin_tables():
        if table.id == key or table.name == key:
            return table
    raise KeyError(f"no sub-module {key!r}")


def export_tables(directory: Union[str, Path], tables: Sequence[SubmoduleTable] = ()) -> List[Path]:
    """Write one <id>_<name>.fsm file per table."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for table in tables or builtin_tables():
        path = directory / f"{table.id}_{table.name}.fsm"
        path.write_text(table.to_text(), encoding="utf-8")
        written.append(path)
    return written


def tick_submodule(
    table: Union[int, str, SubmoduleTable], state: str, inp: Union[Mapping[str, bool], Sequence[bool]]
) -> str:
    """One transition of a sub-module (by id, name or table)."""
    if not isinstance(table, SubmoduleTable):
        table = builtin_table(table)
    return table.next_state(state, inp)
