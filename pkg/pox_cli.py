"""
Command-line entry point for the PoX simulator.

    pox run [--scenario NAME|PATH] [--seed N] [--report FILE]
    pox game [--strategy NAME|all] [--trials N] [--seed N] [--report FILE]
    pox check --trace FILE [--report FILE]
    pox verify-submodules [--depth N] [--mutated] [--show N] [--export DIR] [--report FILE]
    pox demo-fire-sensor [--seed N] [--trace FILE] [--report FILE]
    pox fuzz [--trials N] [--seed N] [--broken SUBMODULE] [--report FILE]

Exit codes: 0 when every expectation of the command holds, 1 when one does
not, 2 for usage errors and unreadable inputs.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from ltl_check import (
    BudgetExceeded,
    PropTrace,
    broken_tables,
    check_trace,
    count_counterexamples,
    end_to_end_fuzz,
    exhaustive_all,
    mutated_table,
)
from mcu_machine.errors import TraceFormatError
from pox_config import PoxSettings, load_settings
from pox_monitor import builtin_tables, export_tables
from pox_scenarios import (
    STRATEGIES,
    ScenarioError,
    builtin_scenarios,
    find_scenario,
    run_scenario,
    run_security_game,
    scenario_fire_sensor,
)

logger = logging.getLogger("pox_cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _emit(text: str, report: Optional[str]) -> None:
    print(text, end="")
    if report:
        Path(report).write_text(text, encoding="utf-8")


def _status(ok: bool, message: str) -> int:
    print(f"\n{'✅' if ok else '❌'} {message}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_run(args, settings: PoxSettings) -> int:
    if args.scenario:
        scenarios = [find_scenario(args.scenario)]
    else:
        scenarios = list(builtin_scenarios().values())

    lines = []
    failed = []
    for scenario in scenarios:
        run = run_scenario(scenario, seed=args.seed, settings=settings)
        status = "PASS" if run.passed else "FAIL"
        lines.append(
            f"{scenario.name}: verdict {run.verdict} expected {scenario.expected} "
            f"exec {run.device.exec} o={run.response.o.hex()}  {status}"
        )
        if not run.passed:
            failed.append(scenario.name)
    lines.append(f"result: {'PASS' if not failed else 'FAIL'}")
    _emit("\n".join(lines) + "\n", args.report)
    if failed:
        return _status(False, f"first failing scenario: {failed[0]}")
    return _status(True, f"{len(scenarios)} scenario(s) got their expected verdict")


def cmd_game(args, settings: PoxSettings) -> int:
    names = list(STRATEGIES) if args.strategy == "all" else [args.strategy]
    sections = []
    failures = []
    for name in names:
        result = run_security_game(name, args.trials, seed=args.seed, settings=settings)
        sections.append(result.to_text(transcripts=args.report is not None))
        if name == "honest":
            ok = result.accepts == result.trials
        else:
            ok = result.wins == 0
        if not ok or result.errors:
            failures.append(name)
        print(f"{name}: {result.accepts}/{result.trials} accepted, {result.wins} adversary wins, {result.errors} errors")

    if args.report:
        text = "\n".join(sections) + f"result: {'PASS' if not failures else 'FAIL'}\n"
        Path(args.report).write_text(text, encoding="utf-8")
    if failures:
        return _status(False, f"first failing strategy: {failures[0]}")
    return _status(True, f"{len(names)} strategy(ies), no adversary wins")


def cmd_check(args, settings: PoxSettings) -> int:
    tr = PropTrace.from_file(args.trace)
    report = check_trace(tr, source=str(args.trace))
    _emit(report.to_text(), args.report)
    failures = report.failures()
    if failures:
        first = failures[0]
        return _status(False, f"{first.name} fails at cycle {first.first_violation}")
    return _status(True, f"all {len(report.verdicts)} properties hold")


def cmd_verify_submodules(args, settings: PoxSettings) -> int:
    if args.export:
        paths = export_tables(args.export, builtin_tables())
        print(f"exported {len(paths)} tables to {args.export}")

    budget = settings.exhaustive_budget
    results = exhaustive_all(args.depth, mutated=args.mutated, budget=budget, limit=args.show)
    label = "mutated" if args.mutated else "built-in"
    lines = [f"depth: {args.depth} ({label} tables)"]
    bad = []
    for name, found in results.items():
        subject = mutated_table(name) if args.mutated else name
        total = count_counterexamples(subject, args.depth, budget=budget)
        lines.append(f"{name}: {total} counterexample(s)")
        if found:
            lines.append(f"  shortest: {found[0]}")
            lines.extend(f"  {cex}" for cex in found[1:])
        # planted mutations must be caught, the real tables must be clean
        if bool(total) != args.mutated:
            bad.append(name)
    lines.append(f"result: {'PASS' if not bad else 'FAIL'}")
    _emit("\n".join(lines) + "\n", args.report)
    if bad:
        return _status(False, f"unexpected outcome for sub-module {bad[0]}")
    return _status(True, f"{len(results)} sub-modules checked to depth {args.depth}")


def cmd_demo_fire_sensor(args, settings: PoxSettings) -> int:
    run = run_scenario(scenario_fire_sensor(args.seed), seed=args.seed, settings=settings)
    if args.trace:
        run.device.save_trace(args.trace)
    report = check_trace(PropTrace.from_device(run.device), source=f"fire_sensor seed {args.seed}")
    alarm = bool(run.device.machine.gpio.out_log)
    header = [
        f"reading: {run.response.o.hex()}",
        f"alarm: {'on' if alarm else 'off'}",
        f"verdict: {run.verdict}",
    ]
    _emit("\n".join(header) + "\n" + report.to_text(), args.report)
    ok = run.verdict == 1 and report.passed
    return _status(ok, "fire-sensor proof accepted" if ok else "fire-sensor round failed")


def cmd_fuzz(args, settings: PoxSettings) -> int:
    tables = broken_tables(args.broken) if args.broken else None
    report = end_to_end_fuzz(args.trials, seed=args.seed, tables=tables)
    _emit(report.to_text(), args.report)
    if args.broken:
        return _status(not report.ok, f"broken {args.broken}: {len(report.discrepancies)} discrepancies")
    return _status(report.ok, f"{report.n_traces} traces, {len(report.discrepancies)} discrepancies")


def build_parser(settings: PoxSettings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pox", description="Proof-of-execution MCU simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def seeded(p):
        p.add_argument("--seed", type=int, default=settings.seed, help=f"Seed (default: POX_SEED or {settings.seed})")
        return p

    run = seeded(sub.add_parser("run", help="Run declarative scenarios"))
    run.add_argument("--scenario", help="Built-in scenario name or scenario file (default: all built-ins)")
    run.add_argument("--report", help="Write the report to this file")
    run.set_defaults(func=cmd_run)

    game = seeded(sub.add_parser("game", help="Play the PoX security game"))
    game.add_argument("--strategy", default="all", help="Strategy name, or 'all' (default)")
    game.add_argument("--trials", type=int, default=100, help="Trials per strategy (default: 100)")
    game.add_argument("--report", help="Write the report, transcripts included, to this file")
    game.set_defaults(func=cmd_game)

    check = sub.add_parser("check", help="Check a recorded trace against the property catalog")
    check.add_argument("--trace", required=True, help="Trace file (JSON Lines)")
    check.add_argument("--report", help="Write the report to this file")
    check.set_defaults(func=cmd_check)

    verify = sub.add_parser("verify-submodules", help="Exhaustively check the monitor sub-modules")
    verify.add_argument("--depth", type=int, default=8, help="Input sequence length (default: 8)")
    verify.add_argument("--mutated", action="store_true", help="Check the planted mutations instead")
    verify.add_argument("--show", type=int, default=5, help="Counterexamples listed per sub-module (default: 5)")
    verify.add_argument("--export", help="Also export the transition tables to this directory")
    verify.add_argument("--report", help="Write the report to this file")
    verify.set_defaults(func=cmd_verify_submodules)

    demo = seeded(sub.add_parser("demo-fire-sensor", help="One fire-sensor PoX round"))
    demo.add_argument("--trace", help="Save the cycle trace to this file")
    demo.add_argument("--report", help="Write the report to this file")
    demo.set_defaults(func=cmd_demo_fire_sensor)

    fuzz = seeded(sub.add_parser("fuzz", help="Randomised end-to-end traces through the full monitor"))
    fuzz.add_argument("--trials", type=int, default=1000, help="Number of traces (default: 1000)")
    fuzz.add_argument("--broken", help="Replace this sub-module with its planted mutation")
    fuzz.add_argument("--report", help="Write the report to this file")
    fuzz.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = load_settings()
    except (ValueError, ValidationError) as e:
        print(f"❌ invalid settings: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=settings.log_level, format="%(levelname)s %(name)s: %(message)s")

    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        return args.func(args, settings)
    except (ScenarioError, TraceFormatError, FileNotFoundError) as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, ValueError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_FAILED
    except KeyboardInterrupt:
        print("\n⚠️ interrupted", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
