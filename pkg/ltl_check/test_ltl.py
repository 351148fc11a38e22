"""
Tests for the formula syntax and the finite-trace semantics, cross-checked
against a direct reading of each operator's definition.
"""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltl_check import (
    And,
    Before,
    Const,
    FormulaSyntaxError,
    Future,
    Globally,
    Implies,
    LtlError,
    Next,
    Not,
    Or,
    Prop,
    PropTrace,
    UnknownProposition,
    Until,
    eval_formula,
    evaluate,
    first_violation,
    parse_formula,
    propositions,
    until_witness,
)
from ltl_check.formula import next_depth

P, Q = Prop("p"), Prop("q")


def trace(**columns):
    return PropTrace({name: [bool(int(c)) for c in bits] for name, bits in columns.items()})


def naive(f, tr, i):
    """Operator definitions read literally, position by position."""
    n = len(tr)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Prop):
        return tr.column(f.name)[i]
    if isinstance(f, Not):
        return not naive(f.operand, tr, i)
    if isinstance(f, And):
        return naive(f.left, tr, i) and naive(f.right, tr, i)
    if isinstance(f, Or):
        return naive(f.left, tr, i) or naive(f.right, tr, i)
    if isinstance(f, Implies):
        return (not naive(f.left, tr, i)) or naive(f.right, tr, i)
    if isinstance(f, Next):
        return i + 1 < n and naive(f.operand, tr, i + 1)
    if isinstance(f, Future):
        return any(naive(f.operand, tr, j) for j in range(i, n))
    if isinstance(f, Globally):
        return all(naive(f.operand, tr, j) for j in range(i, n))
    if isinstance(f, Until):
        return any(
            naive(f.right, tr, j) and all(naive(f.left, tr, k) for k in range(i, j)) for j in range(i, n)
        )
    if isinstance(f, Before):
        # every occurrence of the right operand is preceded (from i) by the left one
        return all(
            any(naive(f.left, tr, k) for k in range(i, j)) for j in range(i, n) if naive(f.right, tr, j)
        )
    raise TypeError(f)


def all_traces(max_len):
    for n in range(1, max_len + 1):
        for bits in itertools.product((0, 1), repeat=2 * n):
            yield PropTrace({"p": list(bits[:n]), "q": list(bits[n:])})


UNARY = (Not, Next, Future, Globally)
BINARY = (And, Or, Implies, Until, Before)

formulas = st.recursive(
    st.sampled_from([P, Q, Const(True), Const(False)]),
    lambda inner: st.one_of(
        st.builds(lambda op, a: op(a), st.sampled_from(UNARY), inner),
        st.builds(lambda op, a, b: op(a, b), st.sampled_from(BINARY), inner, inner),
    ),
    max_leaves=4,
)

prop_traces = st.integers(1, 12).flatmap(
    lambda n: st.builds(
        lambda p, q: PropTrace({"p": p, "q": q}),
        st.lists(st.booleans(), min_size=n, max_size=n),
        st.lists(st.booleans(), min_size=n, max_size=n),
    )
)


class TestParser:
    def test_precedence(self):
        assert parse_formula("a & b | c -> d") == Implies(Or(And(Prop("a"), Prop("b")), Prop("c")), Prop("d"))
        assert parse_formula("!a U b & c") == And(Until(Not(Prop("a")), Prop("b")), Prop("c"))
        assert parse_formula("a -> b -> c") == Implies(Prop("a"), Implies(Prop("b"), Prop("c")))
        assert parse_formula("a U b U c") == Until(Prop("a"), Until(Prop("b"), Prop("c")))
        assert parse_formula("X !a") == Next(Not(Prop("a")))
        assert parse_formula("G(a -> F b)") == Globally(Implies(Prop("a"), Future(Prop("b"))))

    def test_constants_and_parentheses(self):
        assert parse_formula("((true))") == Const(True)
        assert parse_formula("false B p") == Before(Const(False), P)

    @pytest.mark.parametrize(
        "text",
        [
            "G((w_er | dma_er) -> !exec)",
            "G((pc_in_er & X !pc_in_er) -> (pc_eq_ermax | X !exec))",
            "(a B b) U !(c -> X d)",
        ],
    )
    def test_printed_form_parses_back(self, text):
        f = parse_formula(text)
        assert parse_formula(str(f)) == f

    @pytest.mark.parametrize(
        "text, column",
        [
            ("", 0),
            ("p &", 3),
            ("(p | q", 6),
            ("p $ q", 2),
            ("Foo", 0),
            ("p q", 2),
        ],
    )
    def test_syntax_errors(self, text, column):
        with pytest.raises(FormulaSyntaxError) as err:
            parse_formula(text)
        assert err.value.column == column

    def test_propositions_and_depth(self):
        f = parse_formula("G((a & X b) -> X (c | !exec))")
        assert propositions(f) == {"a", "b", "c", "exec"}
        assert next_depth(f) == 1
        assert next_depth(parse_formula("X X p")) == 2

    def test_operator_overloads(self):
        assert (P & ~Q) | P == Or(And(P, Not(Q)), P)


class TestSemantics:
    def test_globally_on_constant_trace(self):
        assert eval_formula("G p", trace(p="1111")) == 1

    def test_strong_next_at_last_position(self):
        tr = trace(p="11")
        assert eval_formula("X p", tr, 0) == 1
        assert eval_formula("X p", tr, 1) == 0

    def test_until_example(self):
        assert eval_formula("p U q", trace(p="110", q="001")) == 1
        assert eval_formula("p U q", trace(p="100", q="001")) == 0

    def test_until_is_strong(self):
        assert eval_formula("p U q", trace(p="111", q="000")) == 0

    def test_before(self):
        assert eval_formula("p B q", trace(p="010", q="001")) == 1
        assert eval_formula("p B q", trace(p="001", q="001")) == 0
        assert eval_formula("p B q", trace(p="000", q="000")) == 1

    def test_position_bounds(self):
        with pytest.raises(LtlError):
            eval_formula("p", trace(p="1"), 1)
        with pytest.raises(LtlError):
            eval_formula("p", PropTrace({"p": []}), 0)

    def test_unknown_proposition(self):
        with pytest.raises(UnknownProposition) as err:
            eval_formula("G nope", trace(p="1"))
        assert err.value.name == "nope"

    def test_first_violation(self):
        tr = trace(p="1101")
        assert first_violation("G p", tr) == 2
        assert first_violation("G (p | !p)", tr) is None
        assert first_violation("F !p", tr) is None
        assert first_violation("!p", tr) == 0

    def test_until_witness(self):
        hold = [True, True, False, True, True]
        goal = [False, False, True, False, False]
        assert until_witness(hold, goal) == [2, 2, 2, -1, -1]

    def test_before_matches_until_on_random_traces(self):
        rng = random.Random(5)
        for _ in range(1000):
            tr = PropTrace({"p": [rng.random() < 0.5 for _ in range(12)], "q": [rng.random() < 0.3 for _ in range(12)]})
            assert evaluate("p B q", tr) == evaluate("!(!p U q)", tr)

    def test_shallow_formulas_agree_with_definitions(self):
        atoms = [P, Q, Const(True), Const(False)]
        shallow = atoms + [op(a) for op in UNARY for a in atoms] + [
            op(a, b) for op in BINARY for a in atoms for b in atoms
        ]
        for tr in all_traces(5):
            for f in shallow:
                vector = evaluate(f, tr)
                assert vector == [naive(f, tr, i) for i in range(len(tr))], (str(f), tr.columns)

    @given(f=formulas)
    @settings(max_examples=200, deadline=None)
    def test_nested_formulas_agree_with_definitions(self, f):
        for tr in all_traces(4):
            assert evaluate(f, tr) == [naive(f, tr, i) for i in range(len(tr))]

    @given(tr=prop_traces)
    @settings(max_examples=200, deadline=None)
    def test_globally_future_duality(self, tr):
        assert evaluate("G p", tr) == evaluate("!F !p", tr)
        assert evaluate("F q", tr) == evaluate("true U q", tr)

    @given(tr=prop_traces)
    @settings(max_examples=200, deadline=None)
    def test_before_until_duality(self, tr):
        assert evaluate("p B q", tr) == evaluate("!(!p U q)", tr)


class TestPropTrace:
    def test_ragged_columns_rejected(self):
        with pytest.raises(ValueError):
            PropTrace({"p": [True], "q": [True, False]})

    def test_rows_and_extension(self):
        tr = PropTrace.from_rows([{"p": True, "q": False}, {"p": False, "q": True}])
        assert tr.names == ["p", "q"]
        assert tr.row(1) == {"p": False, "q": True}
        longer = tr.extend([{"p": True, "q": True}])
        assert len(longer) == 3 and longer.cycle_at(2) == 2
        assert len(longer.prefix(1)) == 1
