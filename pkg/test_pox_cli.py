"""
Tests for the pox command line: exit codes, reports and their determinism.
"""

import json
import re

import pytest

from pox_cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from pox_scenarios import find_scenario, run_scenario


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("POX_SEED", "POX_LOG_LEVEL", "POX_ATTEST_TIMING", "POX_GAME_CONCURRENCY"):
        monkeypatch.delenv(name, raising=False)


class TestDemoAndCheck:
    def test_demo_trace_is_rechecked(self, tmp_path):
        trace = tmp_path / "t.jsonl"
        report = tmp_path / "demo.txt"
        assert main(["demo-fire-sensor", "--seed", "1", "--trace", str(trace), "--report", str(report)]) == EXIT_OK
        assert "verdict: 1" in report.read_text(encoding="utf-8")

        checked = tmp_path / "check.txt"
        assert main(["check", "--trace", str(trace), "--report", str(checked)]) == EXIT_OK
        text = checked.read_text(encoding="utf-8")
        assert text.endswith("result: PASS\n")
        assert "FAIL" not in text

    def test_demo_is_deterministic(self, tmp_path):
        outputs = []
        for run in ("a", "b"):
            trace, report = tmp_path / f"{run}.jsonl", tmp_path / f"{run}.txt"
            assert main(["demo-fire-sensor", "--seed", "1", "--trace", str(trace), "--report", str(report)]) == EXIT_OK
            outputs.append((trace.read_bytes(), report.read_bytes()))
        assert outputs[0] == outputs[1]

    def test_seed_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("POX_SEED", "5")
        report = tmp_path / "demo.txt"
        assert main(["demo-fire-sensor", "--report", str(report)]) == EXIT_OK
        assert "fire_sensor seed 5" in report.read_text(encoding="utf-8")

    def test_hand_edited_exec_fails_metadata_protection(self, tmp_path):
        run = run_scenario(find_scenario("metadata_rewrite"))
        trace = tmp_path / "edited.jsonl"
        run.device.save_trace(trace)

        lines = trace.read_text(encoding="utf-8").splitlines()
        snaps = [json.loads(line) for line in lines]
        drop = next(i for i in range(1, len(snaps)) if snaps[i - 1]["exec"] == 1 and snaps[i]["exec"] == 0)
        for snap in snaps[drop:]:
            snap["exec"] = 1
        trace.write_text("".join(json.dumps(s) + "\n" for s in snaps), encoding="utf-8")

        report = tmp_path / "check.txt"
        assert main(["check", "--trace", str(trace), "--report", str(report)]) == EXIT_FAILED
        match = re.search(r"metadata_protection\s+FAIL\s+first violation at cycle (\d+)", report.read_text(encoding="utf-8"))
        assert match and int(match.group(1)) == snaps[drop]["cycle"]

    def test_empty_trace_is_vacuous(self, tmp_path):
        trace = tmp_path / "empty.jsonl"
        trace.write_text("", encoding="utf-8")
        report = tmp_path / "check.txt"
        assert main(["check", "--trace", str(trace), "--report", str(report)]) == EXIT_OK
        assert "VACUOUS" in report.read_text(encoding="utf-8")

    def test_malformed_trace(self, tmp_path, capsys):
        trace = tmp_path / "bad.jsonl"
        trace.write_text("not json\n", encoding="utf-8")
        assert main(["check", "--trace", str(trace)]) == EXIT_USAGE
        assert "line 1" in capsys.readouterr().err

    def test_missing_trace(self, tmp_path):
        assert main(["check", "--trace", str(tmp_path / "nope.jsonl")]) == EXIT_USAGE


class TestCommands:
    def test_game_single_strategy(self, tmp_path):
        report = tmp_path / "game.txt"
        assert main(["game", "--strategy", "replay_chal", "--trials", "20", "--report", str(report)]) == EXIT_OK
        text = report.read_text(encoding="utf-8")
        assert "adversary wins: 0" in text and text.endswith("result: PASS\n")

    def test_game_honest(self, capsys):
        assert main(["game", "--strategy", "honest", "--trials", "5"]) == EXIT_OK
        assert "honest: 5/5 accepted" in capsys.readouterr().out

    def test_unknown_strategy(self, capsys):
        assert main(["game", "--strategy", "no_such", "--trials", "1"]) == EXIT_USAGE
        assert "unknown strategy" in capsys.readouterr().err

    def test_run_all_scenarios(self, tmp_path):
        report = tmp_path / "run.txt"
        assert main(["run", "--report", str(report)]) == EXIT_OK
        text = report.read_text(encoding="utf-8")
        assert "write42: verdict 1 expected accept" in text
        assert "external_call: verdict 0 expected reject" in text

    def test_unknown_scenario(self):
        assert main(["run", "--scenario", "no_such"]) == EXIT_USAGE

    def test_verify_submodules(self, tmp_path):
        report = tmp_path / "verify.txt"
        export = tmp_path / "tables"
        assert main(["verify-submodules", "--depth", "4", "--export", str(export), "--report", str(report)]) == EXIT_OK
        assert len(list(export.glob("*.fsm"))) == 7
        text = report.read_text(encoding="utf-8")
        assert text.count(": 0 counterexample(s)") == 7

    def test_verify_mutated(self, tmp_path):
        report = tmp_path / "verify.txt"
        assert main(["verify-submodules", "--depth", "4", "--mutated", "--report", str(report)]) == EXIT_OK
        assert "shortest:" in report.read_text(encoding="utf-8")

    def test_fuzz(self):
        assert main(["fuzz", "--trials", "20", "--seed", "3"]) == EXIT_OK

    def test_fuzz_with_broken_submodule(self):
        assert main(["fuzz", "--trials", "300", "--broken", "immutability"]) == EXIT_OK

    @pytest.mark.parametrize(
        "argv",
        [[], ["bogus"], ["game", "-t", "5"], ["check"], ["game", "--trials", "many"]],
    )
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_USAGE

    def test_bad_settings(self, monkeypatch):
        monkeypatch.setenv("POX_ATTEST_TIMING", "slow")
        assert main(["run"]) == EXIT_USAGE
