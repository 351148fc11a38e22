"""
Tests for the property catalog on hand-built proposition traces and on traces
recorded from simulated PoX rounds, including deliberately broken monitors.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcu_machine import assemble
from mcu_machine.events import DmaEvent, ResetEvent
from pox_monitor import Rule, builtin_tables, parse_guard
from pox_protocol import PoxDevice, Prover, Verifier, run_round, store_bytes
from sw_att import SwAttTiming

from ltl_check import (
    END_TO_END,
    END_TO_END_TEXT,
    SAFETY_TEXT,
    PropTrace,
    broken_tables,
    check_end_to_end,
    check_safety,
    check_trace,
    end_to_end_violation,
    eval_formula,
    write_report,
)

KEY = bytes(range(32))
ER = (0xE000, 0xE00B)
OR = (0x4000, 0x4000)
WRITE42 = assemble("MOVI r0, 42\nSTORE r0, 0x4000\nRET", origin=ER[0]).image

END_TO_END_PROPS = (
    "pc_eq_ermin",
    "pc_in_er",
    "pc_eq_ermax",
    "irq",
    "reset",
    "dma_en",
    "mod_er",
    "mod_or",
    "mod_meta",
    "pc_eq_crmin",
    "pc_in_cr",
    "exec",
)


def rows(*steps):
    """One row per step; a step is a space-separated list of true propositions."""
    out = []
    for step in steps:
        true = set(step.split())
        out.append({name: name in true for name in END_TO_END_PROPS})
    return PropTrace.from_rows(out, END_TO_END_PROPS)


ENTRY = "pc_eq_ermin pc_in_er exec"
MID = "pc_in_er exec"
LAST = "pc_eq_ermax pc_in_er exec"
OUT = "exec"
PROOF_START = "pc_eq_crmin pc_in_cr exec"
PROOF = "pc_in_cr exec"


def honest_device():
    device = PoxDevice(KEY)
    verifier = Verifier(KEY, clock=lambda: device.cycle, rng=random.Random(0))
    result = run_round(verifier, Prover(device), WRITE42, ER, OR)
    assert result.verdict == 1
    return device


class TestEndToEndOnBuiltTraces:
    def test_complete_run_then_proof(self):
        assert check_end_to_end(rows(ENTRY, MID, LAST, OUT, PROOF_START, PROOF)) == 1

    def test_output_written_before_proof(self):
        tr = rows(ENTRY, MID, LAST, OUT + " mod_or", PROOF_START, PROOF)
        assert end_to_end_violation(tr) == 4

    def test_output_written_inside_er(self):
        assert check_end_to_end(rows(ENTRY, MID + " mod_or", LAST, PROOF_START)) == 1

    def test_interrupted_run(self):
        assert end_to_end_violation(rows(ENTRY, MID + " irq", LAST, PROOF_START)) == 3

    def test_dma_while_in_er(self):
        assert check_end_to_end(rows(ENTRY, MID + " dma_en", LAST, PROOF_START)) == 0

    def test_left_er_early(self):
        assert check_end_to_end(rows(ENTRY, OUT, LAST, PROOF_START)) == 0

    def test_proof_without_entry(self):
        assert end_to_end_violation(rows(OUT, PROOF_START, PROOF)) == 1

    def test_proof_without_exec_is_not_checked(self):
        assert check_end_to_end(rows("pc_eq_crmin pc_in_cr", "pc_in_cr")) == 1

    def test_never_reaches_rom(self):
        assert check_end_to_end(rows(ENTRY, MID, LAST, OUT)) == 1

    def test_metadata_change_before_proof(self):
        assert check_end_to_end(rows(ENTRY, MID, LAST, OUT + " mod_meta", PROOF_START)) == 0

    def test_later_entry_discharges_later_proof(self):
        tr = rows(OUT, "pc_eq_crmin pc_in_cr", ENTRY, LAST, OUT, PROOF_START)
        assert check_end_to_end(tr) == 1
        assert end_to_end_violation(tr.prefix(2).extend([tr.row(5)])) == 2

    def test_empty_trace(self):
        assert check_end_to_end(PropTrace({name: [] for name in END_TO_END_PROPS})) == 1

    def test_implies_plain_before_formula(self):
        tr = rows(OUT, ENTRY, MID, LAST, OUT, PROOF_START, PROOF)
        assert check_end_to_end(tr) == 1
        assert eval_formula(END_TO_END_TEXT, tr) == 1


class TestHonestRound:
    def test_all_properties_hold(self):
        report = check_trace(PropTrace.from_device(honest_device()), source="honest")
        assert report.passed
        assert len(report.verdicts) == len(SAFETY_TEXT) + 1
        assert not any(v.vacuous for v in report.verdicts)
        assert report.verdict(END_TO_END).passed

    def test_plain_before_formula_holds(self):
        tr = PropTrace.from_device(honest_device())
        assert eval_formula(END_TO_END_TEXT, tr) == 1

    def test_trace_file_gives_same_props(self, tmp_path):
        device = honest_device()
        path = tmp_path / "honest.jsonl"
        device.save_trace(path)
        loaded = PropTrace.from_file(path)
        direct = PropTrace.from_device(device)
        assert loaded.columns == direct.columns
        assert loaded.cycles == direct.cycles

    def test_report_text(self, tmp_path):
        report = check_trace(PropTrace.from_device(honest_device()), source="honest")
        path = write_report(report, tmp_path / "report.txt")
        text = path.read_text()
        assert text.startswith("trace: honest\n")
        assert text.count("PASS") == len(SAFETY_TEXT) + 2
        assert text.endswith("result: PASS\n")

    @given(extra=st.lists(st.sampled_from(["", "pc_in_er", "exec", "mod_or", "irq exec", "pc_eq_crmin pc_in_cr"]), max_size=6))
    @settings(max_examples=50, deadline=None)
    def test_extension_without_proof_keeps_pass(self, extra):
        tr = PropTrace.from_device(honest_device())
        appended = []
        for step in extra:
            true = set(step.split())
            appended.append({name: name in true for name in tr.columns})
        assert check_end_to_end(tr.extend(appended)) == 1

    @pytest.mark.slow
    def test_calibrated_timing_round(self):
        timing = SwAttTiming.named("calibrated")
        device = PoxDevice(KEY, timing=timing)
        verifier = Verifier(KEY, clock=lambda: device.cycle, rng=random.Random(5))
        result = run_round(verifier, Prover(device), WRITE42, ER, OR)
        assert result.verdict == 1
        cr = device.layout.cr
        rom = [s for s in device.trace if cr.start <= s.pc <= cr.end]
        attested = ER[1] - ER[0] + 1 + OR[1] - OR[0] + 1
        assert timing.cost(attested) <= len(rom) <= timing.cost(attested) + 2
        assert check_trace(PropTrace.from_device(device), source="calibrated").passed


class TestViolations:
    def test_empty_trace_is_vacuous(self):
        report = check_trace(PropTrace({}))
        assert report.passed
        assert all(v.vacuous for v in report.verdicts)
        assert "VACUOUS" in report.to_text()

    def test_dma_into_er_with_broken_immutability(self):
        tables = list(builtin_tables())
        imm = tables[0]
        tables[0] = imm.with_rule(imm.find_rule("Run", "dma_er"), Rule("Run", parse_guard("dma_er"), "Run", 1))
        device = PoxDevice(KEY, tables=tables)
        verifier = Verifier(KEY, clock=lambda: device.cycle, rng=random.Random(1))
        prover = Prover(device)
        prover.install(verifier.xrequest(WRITE42, ER, OR))
        prover.xatomic_exec()
        dma_cycle = device.cycle
        device.machine.dma.add(DmaEvent(dma_cycle, "write", ER[0], 0x00))
        device.run()
        report = check_safety(PropTrace.from_device(device))
        verdict = report.verdict("ephemeral_immutability")
        assert not verdict.passed
        assert verdict.first_violation == dma_cycle

    def test_output_overwrite_with_broken_output_protection(self):
        device = PoxDevice(KEY, tables=broken_tables("output_protection"))
        verifier = Verifier(KEY, clock=lambda: device.cycle, rng=random.Random(2))
        prover = Prover(device)
        req = verifier.xrequest(WRITE42, ER, OR)
        prover.install(req)
        prover.xatomic_exec()
        prover.run_untrusted(store_bytes(OR[0], b"\x07"))
        resp = prover.xprove()
        tamper = [s.cycle for s in device.trace if s.w_en and s.d_addr == OR[0] and not ER[0] <= s.pc <= ER[1]][-1]

        report = check_trace(PropTrace.from_device(device))
        assert report.verdict("output_protection").first_violation == tamper
        assert not report.verdict(END_TO_END).passed
        # the broken device even convinces the verifier
        assert verifier.xverify(resp, req.chal) == 1

    def test_output_overwrite_with_real_monitor(self):
        device = PoxDevice(KEY)
        verifier = Verifier(KEY, clock=lambda: device.cycle, rng=random.Random(2))
        prover = Prover(device)
        req = verifier.xrequest(WRITE42, ER, OR)
        prover.install(req)
        prover.xatomic_exec()
        prover.run_untrusted(store_bytes(OR[0], b"\x07"))
        resp = prover.xprove()
        assert check_trace(PropTrace.from_device(device)).passed
        assert verifier.xverify(resp, req.chal) == 0

    def test_reset_mid_execution(self):
        device = PoxDevice(KEY)
        prover = Prover(device)
        prover.install(Verifier(KEY, clock=lambda: device.cycle, rng=random.Random(3)).xrequest(WRITE42, ER, OR))
        reset_at = device.cycle + 3
        device.machine.resets.add(ResetEvent(reset_at))
        prover.xatomic_exec()
        snap = next(s for s in device.trace if s.cycle == reset_at)
        assert snap.reset == 1 and snap.exec == 0
        report = check_trace(PropTrace.from_device(device))
        assert report.verdict("reset_clears_exec").passed
        assert report.passed

    @pytest.mark.parametrize("name", ["metadata", "reset_gate", "atomicity"])
    def test_broken_monitor_without_attack_still_passes(self, name):
        device = PoxDevice(KEY, tables=broken_tables(name))
        verifier = Verifier(KEY, clock=lambda: device.cycle, rng=random.Random(4))
        assert run_round(verifier, Prover(device), WRITE42, ER, OR).verdict == 1
        assert check_trace(PropTrace.from_device(device)).passed
