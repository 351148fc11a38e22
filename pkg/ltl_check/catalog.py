"""
The PoX property catalog: the per-sub-module safety formulas, checked over
whole device traces, and the end-to-end execution property they imply.
"""

from typing import Dict, List, Optional, Tuple

from ltl_check.evaluator import NO_WITNESS, evaluate, first_violation, until_witness
from ltl_check.formula import Formula, parse_formula
from ltl_check.props import PropTrace
from ltl_check.report import CheckReport, FormulaVerdict

SAFETY_TEXT: Tuple[Tuple[str, str], ...] = (
    ("ephemeral_immutability", "G((w_er | dma_er) -> !exec)"),
    ("atomicity_exit", "G((pc_in_er & X !pc_in_er) -> (pc_eq_ermax | X !exec))"),
    ("atomicity_entry", "G((!pc_in_er & X pc_in_er) -> X (pc_eq_ermin | !exec))"),
    ("atomicity_no_irq", "G((pc_in_er & irq) -> !exec)"),
    ("output_protection", "G(((!pc_in_er & w_or) | dma_or | (pc_in_er & dma_en)) -> !exec)"),
    ("bounds_valid", "G(!bounds_valid -> !exec)"),
    ("er_cr_disjoint", "G(!er_cr_disjoint -> !exec)"),
    ("metadata_protection", "G((w_meta | dma_meta) -> !exec)"),
    ("response_entry", "G((!exec & X exec) -> X pc_eq_ermin)"),
    ("reset_clears_exec", "G(reset -> !exec)"),
)

SAFETY_FORMULAS: Dict[str, Formula] = {name: parse_formula(text) for name, text in SAFETY_TEXT}

# Formulas each sub-module must satisfy on its own, exec being its output.
SUBMODULE_FORMULAS: Dict[str, Tuple[str, ...]] = {
    "immutability": ("ephemeral_immutability", "response_entry"),
    "atomicity": ("atomicity_exit", "atomicity_entry", "atomicity_no_irq", "response_entry"),
    "output_protection": ("output_protection", "response_entry"),
    "boundaries": ("bounds_valid", "response_entry"),
    "er_cr_disjoint": ("er_cr_disjoint", "response_entry"),
    "metadata": ("metadata_protection", "response_entry"),
    "reset_gate": ("reset_clears_exec", "response_entry"),
}

END_TO_END = "end_to_end"
RUN_CLEAN = "pc_in_er & !irq & !reset & !dma_en"
NO_TAMPER = "!mod_er & !mod_meta & (pc_in_er | !mod_or)"
PROOF = "exec & pc_in_cr"
END_TO_END_TEXT = f"(pc_eq_ermin & (({RUN_CLEAN}) U pc_eq_ermax) & (({NO_TAMPER}) U pc_eq_crmin)) B ({PROOF})"


def check_safety(tr: PropTrace, source: str = "<trace>") -> CheckReport:
    """Every catalog formula at position 0, with first-violation cycles."""
    memo: Dict[Formula, List[bool]] = {}
    verdicts = []
    for name, text in SAFETY_TEXT:
        if len(tr) == 0:
            verdicts.append(FormulaVerdict(name=name, formula=text, passed=True, vacuous=True))
            continue
        pos = first_violation(SAFETY_FORMULAS[name], tr, memo)
        verdicts.append(
            FormulaVerdict(
                name=name,
                formula=text,
                passed=pos is None,
                first_violation=None if pos is None else tr.cycle_at(pos),
            )
        )
    return CheckReport(source=source, length=len(tr), verdicts=verdicts)


def end_to_end_violation(tr: PropTrace) -> Optional[int]:
    """First position where a proof is live without a complete, untampered run before it.

    A position k with exec & pc_in_cr is covered when some j < k has
    pc_eq_ermin and both until-obligations starting at j are discharged
    within tr[0..k]. Positions after k do not matter for k.
    """
    n = len(tr)
    if n == 0:
        return None
    memo: Dict[Formula, List[bool]] = {}
    entry = evaluate("pc_eq_ermin", tr, memo)
    run_end = until_witness(evaluate(RUN_CLEAN, tr, memo), evaluate("pc_eq_ermax", tr, memo))
    proof_start = until_witness(evaluate(NO_TAMPER, tr, memo), evaluate("pc_eq_crmin", tr, memo))
    proof = evaluate(PROOF, tr, memo)

    best = n  # smallest discharge point over entries seen so far
    for k in range(n):
        if proof[k] and best > k:
            return k
        if entry[k] and run_end[k] != NO_WITNESS and proof_start[k] != NO_WITNESS:
            best = min(best, max(run_end[k], proof_start[k]))
    return None


def check_end_to_end(tr: PropTrace) -> int:
    return int(end_to_end_violation(tr) is None)


def end_to_end_verdict(tr: PropTrace) -> FormulaVerdict:
    if len(tr) == 0:
        return FormulaVerdict(name=END_TO_END, formula=END_TO_END_TEXT, passed=True, vacuous=True)
    pos = end_to_end_violation(tr)
    return FormulaVerdict(
        name=END_TO_END,
        formula=END_TO_END_TEXT,
        passed=pos is None,
        first_violation=None if pos is None else tr.cycle_at(pos),
    )


def check_trace(tr: PropTrace, source: str = "<trace>") -> CheckReport:
    """The ten catalog formulas followed by the end-to-end property."""
    report = check_safety(tr, source)
    report.verdicts.append(end_to_end_verdict(tr))
    return report
