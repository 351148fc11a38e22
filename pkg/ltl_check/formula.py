"""
LTL formula trees and their text syntax.

    phi ::= true | false | name | !phi | X phi | F phi | G phi
          | phi & phi | phi | phi | phi -> phi | phi U phi | phi B phi

Unary operators bind tightest, then U and B (right associative), then &,
then |, then -> (right associative). Names are lower-case identifiers; the
single capitals X F G U B are operators.
"""

import re
from dataclasses import dataclass
from typing import List, Set, Tuple, Union

from ltl_check.errors import FormulaSyntaxError


class Formula:
    """Base of every formula node; nodes are frozen and hashable."""

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Prop(Formula):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class _Unary(Formula):
    operand: Formula

    symbol = "?"

    def children(self) -> Tuple[Formula, ...]:
        return (self.operand,)

    def __str__(self) -> str:
        sep = "" if self.symbol == "!" else " "
        return f"{self.symbol}{sep}{_wrap(self.operand)}"


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    symbol = "?"

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"{_wrap(self.left)} {self.symbol} {_wrap(self.right)}"


@dataclass(frozen=True)
class Not(_Unary):
    symbol = "!"


@dataclass(frozen=True)
class Next(_Unary):
    symbol = "X"


@dataclass(frozen=True)
class Future(_Unary):
    symbol = "F"


@dataclass(frozen=True)
class Globally(_Unary):
    symbol = "G"


@dataclass(frozen=True)
class And(_Binary):
    symbol = "&"


@dataclass(frozen=True)
class Or(_Binary):
    symbol = "|"


@dataclass(frozen=True)
class Implies(_Binary):
    symbol = "->"


@dataclass(frozen=True)
class Until(_Binary):
    symbol = "U"


@dataclass(frozen=True)
class Before(_Binary):
    symbol = "B"


TRUE = Const(True)
FALSE = Const(False)

TEMPORAL = (Next, Future, Globally, Until, Before)


def _wrap(f: Formula) -> str:
    return str(f) if isinstance(f, (Const, Prop)) else f"({f})"


def subformulas(f: Formula) -> List[Formula]:
    """Distinct subformulas, operands before the nodes that use them."""
    order: List[Formula] = []
    seen: Set[Formula] = set()

    def visit(node: Formula) -> None:
        if node in seen:
            return
        seen.add(node)
        for child in node.children():
            visit(child)
        order.append(node)

    visit(f)
    return order


def propositions(f: Formula) -> Set[str]:
    return {node.name for node in subformulas(f) if isinstance(node, Prop)}


def next_depth(f: Formula) -> int:
    """Deepest nesting of X."""
    inner = max((next_depth(c) for c in f.children()), default=0)
    return inner + 1 if isinstance(f, Next) else inner


def is_state_formula(f: Formula) -> bool:
    return not any(isinstance(node, TEMPORAL) for node in subformulas(f))


_TOKEN = re.compile(r"\s*(->|[!&|()]|[A-Za-z_][A-Za-z0-9_]*)")
_UNARY = {"!": Not, "X": Next, "F": Future, "G": Globally}
_UNTIL = {"U": Until, "B": Before}


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[col]!r}", col)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else ""

    def column(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self) -> str:
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            found = self.peek() or "end of input"
            raise FormulaSyntaxError(f"expected {tok!r}, found {found!r}", self.column())
        self.i += 1

    def parse(self) -> Formula:
        if not self.tokens:
            raise FormulaSyntaxError("empty formula", 0)
        f = self.implies()
        if self.i != len(self.tokens):
            raise FormulaSyntaxError(f"unexpected {self.peek()!r}", self.column())
        return f

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.until()
        while self.peek() == "&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        op = _UNTIL.get(self.peek())
        if op is not None:
            self.take()
            return op(left, self.until())
        return left

    def unary(self) -> Formula:
        op = _UNARY.get(self.peek())
        if op is not None:
            self.take()
            return op(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        col = self.column()
        tok = self.take()
        if tok == "(":
            f = self.implies()
            self.expect(")")
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if tok and (tok[0].islower() or tok[0] == "_"):
            return Prop(tok)
        raise FormulaSyntaxError(f"expected a proposition or '(', found {tok or 'end of input'!r}", col)


def parse_formula(text: Union[str, Formula]) -> Formula:
    """Parse formula text; formulas pass through unchanged."""
    if isinstance(text, Formula):
        return text
    return _Parser(text).parse()
