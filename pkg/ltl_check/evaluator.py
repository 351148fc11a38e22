"""
Finite-trace LTL evaluation.

Every subformula is evaluated once over the whole trace, operands first,
giving a truth vector per subformula. Semantics on a trace of length n:

    X a      a at i+1; false at the last position (strong next)
    F a      a somewhere in [i, n)
    G a      a everywhere in [i, n)
    a U b    b at some j >= i with a on [i, j)  (strong: b must occur)
    a B b    !b at i, and (a at i, or i is last, or a B b at i+1)

a B b coincides with !(!a U b).
"""

from typing import Dict, List, Optional, Union

from ltl_check.errors import LtlError
from ltl_check.formula import (
    And,
    Before,
    Const,
    Formula,
    Future,
    Globally,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    Until,
    parse_formula,
    subformulas,
)
from ltl_check.props import PropTrace

Vector = List[bool]
Memo = Dict[Formula, Vector]

NO_WITNESS = -1


def _backward(n: int, last: bool, combine) -> Vector:
    out = [False] * n
    if n == 0:
        return out
    out[n - 1] = last
    for i in range(n - 2, -1, -1):
        out[i] = combine(i, out[i + 1])
    return out


def evaluate(f: Union[str, Formula], tr: PropTrace, memo: Optional[Memo] = None) -> Vector:
    """Truth vector of f at every position of tr."""
    f = parse_formula(f)
    memo = {} if memo is None else memo
    n = len(tr)
    for node in subformulas(f):
        if node in memo:
            continue
        if isinstance(node, Const):
            v = [node.value] * n
        elif isinstance(node, Prop):
            v = list(tr.column(node.name))
        elif isinstance(node, Not):
            v = [not x for x in memo[node.operand]]
        elif isinstance(node, And):
            v = [a and b for a, b in zip(memo[node.left], memo[node.right])]
        elif isinstance(node, Or):
            v = [a or b for a, b in zip(memo[node.left], memo[node.right])]
        elif isinstance(node, Implies):
            v = [(not a) or b for a, b in zip(memo[node.left], memo[node.right])]
        elif isinstance(node, Next):
            a = memo[node.operand]
            v = a[1:] + [False] if n else []
        elif isinstance(node, Future):
            a = memo[node.operand]
            v = _backward(n, a[-1] if n else False, lambda i, nxt: a[i] or nxt)
        elif isinstance(node, Globally):
            a = memo[node.operand]
            v = _backward(n, a[-1] if n else False, lambda i, nxt: a[i] and nxt)
        elif isinstance(node, Until):
            a, b = memo[node.left], memo[node.right]
            v = _backward(n, b[-1] if n else False, lambda i, nxt: b[i] or (a[i] and nxt))
        elif isinstance(node, Before):
            a, b = memo[node.left], memo[node.right]
            v = _backward(n, not b[-1] if n else False, lambda i, nxt: (not b[i]) and (a[i] or nxt))
        else:
            raise LtlError(f"unsupported formula node {type(node).__name__}")
        memo[node] = v
    return memo[f]


def eval_formula(f: Union[str, Formula], tr: PropTrace, pos: int = 0) -> int:
    """Bit value of f at pos; pure."""
    if not 0 <= pos < len(tr):
        raise LtlError(f"position {pos} outside a trace of length {len(tr)}")
    return int(evaluate(f, tr)[pos])


def first_violation(f: Union[str, Formula], tr: PropTrace, memo: Optional[Memo] = None) -> Optional[int]:
    """First position where a G-formula's body fails, or None when f holds at 0.

    For formulas not rooted at G the answer is 0 or None.
    """
    f = parse_formula(f)
    if len(tr) == 0:
        return None
    if isinstance(f, Globally):
        body = evaluate(f.operand, tr, memo)
        return next((i for i, ok in enumerate(body) if not ok), None)
    return None if evaluate(f, tr, memo)[0] else 0


def until_witness(hold: Vector, goal: Vector) -> List[int]:
    """Earliest j >= i with goal[j] and hold on [i, j), per position; NO_WITNESS if none."""
    n = len(goal)
    out = [NO_WITNESS] * n
    nxt = NO_WITNESS
    for i in range(n - 1, -1, -1):
        if goal[i]:
            nxt = i
        elif not hold[i]:
            nxt = NO_WITNESS
        out[i] = nxt
    return out
