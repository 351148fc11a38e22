"""
Exhaustive check of one monitor sub-module against its formulas.

Every input sequence up to the given depth is explored from the initial
state, inputs restricted to structurally consistent assignments over the
sub-module's own input bits. The catalog formulas are G over a body that
looks at most one step ahead, so a sequence violates iff one of its
two-position windows does; the search therefore keeps one node per
(state, last input) and checks each window once. Counterexamples are
listed shortest first, then in input order.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from pox_monitor.fsm import NOT_EXEC, Rule, SubmoduleTable, builtin_table, builtin_tables, parse_guard
from pox_monitor.inputs import consistent

from ltl_check.catalog import SAFETY_FORMULAS, SUBMODULE_FORMULAS
from ltl_check.errors import BudgetExceeded, LtlError
from ltl_check.evaluator import evaluate, first_violation
from ltl_check.formula import TEMPORAL, Formula, Globally, Next, next_depth, propositions, subformulas
from ltl_check.props import PropTrace

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 5_000_000

# sub-module -> (state, guard, mutated next state, mutated guard or None to keep it)
PLANTED_MUTATIONS: Dict[str, Tuple[str, str, str, Optional[str]]] = {
    "immutability": ("Run", "w_er", "Run", None),
    "atomicity": ("midER", "pc_in_er & !irq", "midER", "pc_in_er"),
    "output_protection": ("Run", "!pc_in_er & w_or", "Run", None),
    "boundaries": ("NotExec", "pc_eq_ermin & bounds_valid", "Run", "pc_eq_ermin"),
    "er_cr_disjoint": ("NotExec", "pc_eq_ermin & er_cr_disjoint", "Run", "pc_eq_ermin"),
    "metadata": ("NotExec", "pc_eq_ermin & !w_meta & !dma_meta", "Run", "pc_eq_ermin"),
    "reset_gate": ("Run", "reset", "Run", None),
}


@dataclass(frozen=True)
class Counterexample:
    """An input sequence whose induced output trace violates a formula."""

    submodule: str
    formula: str
    input_names: Tuple[str, ...]
    inputs: Tuple[Tuple[bool, ...], ...]
    position: int

    def rows(self) -> List[Dict[str, bool]]:
        return [dict(zip(self.input_names, values)) for values in self.inputs]

    def __str__(self) -> str:
        steps = "; ".join(
            " ".join(n for n, v in zip(self.input_names, values) if v) or "-" for values in self.inputs
        )
        return f"{self.submodule}: {self.formula} fails at step {self.position} on [{steps}]"


def mutated_table(name: str) -> SubmoduleTable:
    """Built-in table with its planted mutation applied."""
    table = builtin_table(name)
    state, guard, next_state, new_guard = PLANTED_MUTATIONS[name]
    index = table.find_rule(state, guard)
    rule = Rule(state, parse_guard(new_guard or guard), next_state, int(next_state != NOT_EXEC))
    return table.with_rule(index, rule)


def input_alphabet(names: Sequence[str]) -> List[Tuple[bool, ...]]:
    """Consistent assignments over names, in a fixed order."""
    return [
        values
        for values in itertools.product((False, True), repeat=len(names))
        if consistent(dict(zip(names, values)))
    ]


def estimate_size(table: SubmoduleTable, depth: int) -> int:
    alphabet = len(input_alphabet(table.inputs))
    return depth * len(table.states) * alphabet * alphabet


def _window_formula(name: str) -> Tuple[Formula, Formula]:
    f = SAFETY_FORMULAS[name]
    if not isinstance(f, Globally):
        raise LtlError(f"{name} is not a G-formula")
    body = f.operand
    if next_depth(body) > 1 or any(isinstance(n, TEMPORAL) and not isinstance(n, Next) for n in subformulas(body)):
        raise LtlError(f"{name} looks further ahead than one step")
    return f, body


def _window(names: Sequence[str], steps: Sequence[Tuple[Tuple[bool, ...], int]]) -> PropTrace:
    columns = {n: [values[i] for values, _ in steps] for i, n in enumerate(names)}
    columns["exec"] = [bool(bit) for _, bit in steps]
    return PropTrace(columns)


def run_submodule(table: SubmoduleTable, rows: Sequence[Mapping[str, bool]]) -> PropTrace:
    """Tick table over rows from its initial state; inputs plus exec per step."""
    state = table.initial
    execs = []
    for row in rows:
        state = table.next_state(state, row)
        execs.append(table.output(state))
    columns = {n: [bool(row[n]) for row in rows] for n in table.inputs}
    columns["exec"] = [bool(bit) for bit in execs]
    return PropTrace(columns)


def replay(table: SubmoduleTable, cex: Counterexample) -> Optional[int]:
    """First violation of the counterexample's formula on its replayed trace."""
    return first_violation(SAFETY_FORMULAS[cex.formula], run_submodule(table, cex.rows()))


class _Search:
    """Input sequences from the initial state, one node per (state, last input).

    A formula fails first on the input that completes a violating window;
    later inputs cannot repair it, so only sequences ending on that input
    are enumerated.
    """

    def __init__(
        self,
        key: Union[int, str, SubmoduleTable],
        depth: int,
        budget: int,
        formulas: Optional[Sequence[str]],
    ):
        if depth < 1:
            raise ValueError("depth must be at least 1")
        self.table = table = key if isinstance(key, SubmoduleTable) else builtin_table(key)
        self.depth = depth
        self.names = table.inputs
        self.alphabet = input_alphabet(self.names)
        estimate = estimate_size(table, depth)
        if estimate > budget:
            raise BudgetExceeded(estimate, budget)

        self.checks = [(name, *_window_formula(name)) for name in formulas or SUBMODULE_FORMULAS[table.name]]
        for name, f, _ in self.checks:
            missing = propositions(f) - set(self.names) - {"exec"}
            if missing:
                raise LtlError(f"{name} uses {sorted(missing)}, which {table.name} does not read")

        # (state, last, input) -> (next state, per check: offset of the failing window or None)
        self._steps: Dict[Tuple[str, int, int], Tuple[str, Tuple[Optional[int], ...]]] = {}
        # (check, state, last, remaining) -> sequences of exactly that length failing on their last input
        self._counts: Dict[Tuple[int, str, int, int], int] = {}

    @property
    def transitions(self) -> int:
        return len(self._steps)

    def advance(self, state: str, last: int, idx: int) -> Tuple[str, Tuple[Optional[int], ...]]:
        key = (state, last, idx)
        if key not in self._steps:
            values = self.alphabet[idx]
            nxt = self.table.next_state(state, dict(zip(self.names, values)))
            bit = self.table.output(nxt)
            single = _window(self.names, [(values, bit)])
            pair = None
            if last >= 0:
                pair = _window(self.names, [(self.alphabet[last], self.table.output(state)), (values, bit)])
            fails: List[Optional[int]] = []
            for _, _, body in self.checks:
                if pair is not None and not evaluate(body, pair)[0]:
                    fails.append(-1)
                elif not evaluate(body, single)[0]:
                    fails.append(0)
                else:
                    fails.append(None)
            self._steps[key] = (nxt, tuple(fails))
        return self._steps[key]

    def count(self, k: int, state: str, last: int, remaining: int) -> int:
        key = (k, state, last, remaining)
        if key not in self._counts:
            total = 0
            for idx in range(len(self.alphabet)):
                nxt, fails = self.advance(state, last, idx)
                if fails[k] is not None:
                    total += int(remaining == 1)
                elif remaining > 1:
                    total += self.count(k, nxt, idx, remaining - 1)
            self._counts[key] = total
        return self._counts[key]

    def total(self) -> int:
        return sum(
            self.count(k, self.table.initial, -1, length)
            for length in range(1, self.depth + 1)
            for k in range(len(self.checks))
        )

    def walk(self, length: int) -> Iterator[Counterexample]:
        """Counterexamples of exactly length inputs, in input order."""
        start = [k for k in range(len(self.checks)) if self.count(k, self.table.initial, -1, length)]
        if start:
            yield from self._walk(self.table.initial, -1, (), length, start)

    def _walk(self, state: str, last: int, path: Tuple[int, ...], remaining: int, active: List[int]) -> Iterator[Counterexample]:
        for idx in range(len(self.alphabet)):
            nxt, fails = self.advance(state, last, idx)
            here = path + (idx,)
            if remaining == 1:
                for k in active:
                    if fails[k] is not None:
                        yield Counterexample(
                            submodule=self.table.name,
                            formula=self.checks[k][0],
                            input_names=tuple(self.names),
                            inputs=tuple(self.alphabet[i] for i in here),
                            position=len(path) + fails[k],
                        )
                continue
            deeper = [k for k in active if fails[k] is None and self.count(k, nxt, idx, remaining - 1)]
            if deeper:
                yield from self._walk(nxt, idx, here, remaining - 1, deeper)


def exhaustive_submodule(
    key: Union[int, str, SubmoduleTable],
    depth: int,
    budget: int = DEFAULT_BUDGET,
    formulas: Optional[Sequence[str]] = None,
    limit: Optional[int] = None,
) -> List[Counterexample]:
    """All violating input sequences of length <= depth, shortest first (expected: none).

    A sequence is listed once per formula it violates on its last input and
    not before; its extensions violate as well and are left out. limit keeps
    only the first that many.
    """
    search = _Search(key, depth, budget, formulas)
    found: List[Counterexample] = []
    for length in range(1, depth + 1):
        room = None if limit is None else limit - len(found)
        if room is not None and room <= 0:
            break
        found.extend(itertools.islice(search.walk(length), room))

    logger.info(
        "%s: %d transitions to depth %d, %d counterexamples",
        search.table.name,
        search.transitions,
        depth,
        len(found),
    )
    return found


def count_counterexamples(
    key: Union[int, str, SubmoduleTable],
    depth: int,
    budget: int = DEFAULT_BUDGET,
    formulas: Optional[Sequence[str]] = None,
) -> int:
    """Number of sequences exhaustive_submodule would list without a limit."""
    return _Search(key, depth, budget, formulas).total()


def exhaustive_all(
    depth: int,
    mutated: bool = False,
    budget: int = DEFAULT_BUDGET,
    limit: Optional[int] = None,
) -> Dict[str, List[Counterexample]]:
    """Run the exhaustive check on every built-in sub-module (or its planted mutation)."""
    results = {}
    for table in builtin_tables():
        subject = mutated_table(table.name) if mutated else table
        results[table.name] = exhaustive_submodule(subject, depth, budget=budget, limit=limit)
    return results
