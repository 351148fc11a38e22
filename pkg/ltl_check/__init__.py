"""
LTL checker

Finite-trace LTL over proposition traces, the PoX property catalog,
exhaustive sub-module checks and randomised end-to-end fuzzing.
"""

from ltl_check.catalog import (
    END_TO_END,
    END_TO_END_TEXT,
    SAFETY_FORMULAS,
    SAFETY_TEXT,
    SUBMODULE_FORMULAS,
    check_end_to_end,
    check_safety,
    check_trace,
    end_to_end_violation,
)
from ltl_check.errors import BudgetExceeded, FormulaSyntaxError, LtlError, UnknownProposition
from ltl_check.evaluator import eval_formula, evaluate, first_violation, until_witness
from ltl_check.exhaustive import (
    PLANTED_MUTATIONS,
    Counterexample,
    count_counterexamples,
    estimate_size,
    exhaustive_all,
    exhaustive_submodule,
    input_alphabet,
    mutated_table,
    replay,
    run_submodule,
)
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
    propositions,
)
from ltl_check.fuzz import FuzzReport, broken_tables, end_to_end_fuzz, run_trial
from ltl_check.props import TRACE_PROPS, PropTrace
from ltl_check.report import CheckReport, FormulaVerdict, write_report

__all__ = [
    "And",
    "Before",
    "BudgetExceeded",
    "CheckReport",
    "Const",
    "Counterexample",
    "END_TO_END",
    "END_TO_END_TEXT",
    "Formula",
    "FormulaSyntaxError",
    "FormulaVerdict",
    "FuzzReport",
    "Future",
    "Globally",
    "Implies",
    "LtlError",
    "Next",
    "Not",
    "Or",
    "PLANTED_MUTATIONS",
    "Prop",
    "PropTrace",
    "SAFETY_FORMULAS",
    "SAFETY_TEXT",
    "SUBMODULE_FORMULAS",
    "TRACE_PROPS",
    "UnknownProposition",
    "Until",
    "broken_tables",
    "check_end_to_end",
    "check_safety",
    "check_trace",
    "count_counterexamples",
    "end_to_end_fuzz",
    "end_to_end_violation",
    "estimate_size",
    "eval_formula",
    "evaluate",
    "exhaustive_all",
    "exhaustive_submodule",
    "first_violation",
    "input_alphabet",
    "mutated_table",
    "parse_formula",
    "propositions",
    "replay",
    "run_submodule",
    "run_trial",
    "until_witness",
    "write_report",
]

__version__ = "0.1.0"
