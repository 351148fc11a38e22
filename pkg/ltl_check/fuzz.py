"""
Randomised end-to-end check that the catalog formulas, holding on a device
trace, imply the end-to-end execution property on that trace.

Each trial builds a random straight-line ER program, installs it through the
prover's untrusted runtime, schedules random interrupts, DMA transfers and
resets around its execution, optionally tampers with ER, OR or METADATA
afterwards, and asks for a proof. Output regions are drawn from the whole data
region, often right under the stack top. The recorded trace is then checked.
"""

import logging
import random
from typing import List, Optional, Sequence

from pydantic import BaseModel, Field

from mcu_machine.assembler import assemble
from mcu_machine.events import DmaEvent, IrqEvent, ResetEvent
from mcu_machine.isa import INSTRUCTION_SIZE, Instruction, Opcode

from pox_monitor.fsm import SubmoduleTable, builtin_tables
from pox_monitor.metadata import CHAL_SIZE, OR_BOTTOM, field_bytes
from pox_protocol.device import PoxDevice
from pox_protocol.prover import Prover, store_bytes
from pox_protocol.wire import Request

from ltl_check.catalog import check_trace
from ltl_check.exhaustive import mutated_table
from ltl_check.props import PropTrace

logger = logging.getLogger(__name__)

HANDLER = 0x0800
SCRATCH = 0x5000
ER_BASE = 0xE000


class FuzzDiscrepancy(BaseModel):
    trial: int
    failed: List[str] = Field(..., description="Properties that failed on the trial's trace")
    first_cycle: Optional[int] = Field(None, description="Earliest violation cycle among them")


class FuzzReport(BaseModel):
    n_traces: int
    seed: int
    cycles: int = Field(0, description="Total cycles simulated")
    proofs: int = Field(0, description="Trials in which a proof ran with exec=1")
    discrepancies: List[FuzzDiscrepancy] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def to_text(self) -> str:
        lines = [
            f"trials: {self.n_traces} (seed {self.seed})",
            f"cycles: {self.cycles}",
            f"proofs with exec=1: {self.proofs}",
            f"discrepancies: {len(self.discrepancies)}",
        ]
        for d in self.discrepancies[:20]:
            lines.append(f"  trial {d.trial}: {', '.join(d.failed)} (cycle {d.first_cycle})")
        return "\n".join(lines) + "\n"


def broken_tables(name: str) -> List[SubmoduleTable]:
    """Built-in tables with one sub-module replaced by its planted mutation."""
    return [mutated_table(t.name) if t.name == name else t for t in builtin_tables()]


def _random_program(rng: random.Random, er_min: int, n: int, or_range, er_max: int) -> bytes:
    """n-1 random instructions followed by RET, all inside ER."""
    lines = []
    for i in range(n - 1):
        roll = rng.random()
        reg, other = rng.randrange(4), rng.randrange(4)
        if roll < 0.25:
            lines.append(f"MOVI r{reg}, {rng.randrange(256)}")
        elif roll < 0.5 and or_range is not None:
            lines.append(f"STORE r{reg}, 0x{rng.randint(*or_range):04X}")
        elif roll < 0.6:
            lines.append(f"ADD r{reg}, r{other}")
        elif roll < 0.7:
            lines.append(f"LOAD r{reg}, 0x{SCRATCH + rng.randrange(16):04X}")
        elif roll < 0.75:
            lines.append(f"STORE r{reg}, 0x{SCRATCH + rng.randrange(16):04X}")
        elif roll < 0.78:
            # self-modifying store
            lines.append(f"STORE r{reg}, 0x{rng.randint(er_min, er_max):04X}")
        elif roll < 0.8:
            lines.append(f"JMP 0x{er_min + INSTRUCTION_SIZE * rng.randint(i + 1, n - 1):04X}")
        else:
            lines.append("NOP")
    lines.append("RET")
    return assemble("\n".join(lines), origin=er_min).image


def _output_region(rng: random.Random, layout):
    length = rng.randint(1, 4)
    if rng.random() < 0.4:
        hi = layout.stack_top - 1 - rng.randrange(2)
    else:
        hi = rng.randint(layout.data.start + length - 1, layout.data.end)
    return hi - length + 1, hi


def _tamper(rng: random.Random, req: Request, layout) -> List[Instruction]:
    target = rng.choice(("or", "er", "meta", "scratch", "push"))
    value = rng.randrange(256)
    if target == "or" and req.or_min != OR_BOTTOM:
        return store_bytes(rng.randint(req.or_min, req.or_max), bytes([value]))
    if target == "er":
        return store_bytes(rng.randint(req.er_min, req.er_max), bytes([value]))
    if target == "meta":
        offset, raw = field_bytes("er_max", req.er_max + INSTRUCTION_SIZE)
        return store_bytes(layout.metadata.start + offset, raw)
    if target == "push":
        # CALL over a HALT to a RET: pushes one return address
        aux = layout.aux.start
        return [Instruction(Opcode.CALL, imm=aux + 8), Instruction(Opcode.HALT), Instruction(Opcode.RET)]
    return store_bytes(SCRATCH, bytes([value]))


def run_trial(trial: int, seed: int, tables: Optional[Sequence[SubmoduleTable]] = None) -> PoxDevice:
    """One randomised scenario; returns the device holding the recorded trace."""
    rng = random.Random(seed * 1_000_003 + trial)
    device = PoxDevice(rng.randbytes(32), tables=tables)
    prover = Prover(device, budget=2_000)
    layout = device.layout
    device.machine.load_image(HANDLER, assemble("RETI", origin=HANDLER).image)

    n = rng.randint(3, 10)
    er_min = ER_BASE + 0x40 * rng.randrange(16)
    er_max = er_min + n * INSTRUCTION_SIZE - 1
    or_range = None
    if rng.random() < 0.8:
        or_range = _output_region(rng, layout)
    s = _random_program(rng, er_min, n, or_range, er_max)
    req = Request(
        chal=rng.randbytes(CHAL_SIZE),
        er_min=er_min,
        er_max=er_max,
        or_min=or_range[0] if or_range else OR_BOTTOM,
        or_max=or_range[1] if or_range else OR_BOTTOM,
        s=s,
    )
    if rng.random() < 0.1:
        req = req.model_copy(update={"er_max": er_max + INSTRUCTION_SIZE})
    prover.install(req)

    base = device.cycle
    window = n + 4
    if rng.random() < 0.3:
        device.machine.irqs.add(IrqEvent(base + rng.randrange(window), HANDLER))
    if rng.random() < 0.3:
        addr = rng.choice((er_min, or_range[0] if or_range else SCRATCH, layout.metadata.start, SCRATCH))
        op = rng.choice(("read", "write"))
        device.machine.dma.add(DmaEvent(base + rng.randrange(window), op, addr, rng.randrange(256)))
    if rng.random() < 0.1:
        device.machine.resets.add(ResetEvent(base + rng.randrange(window)))

    prover.xatomic_exec()
    if rng.random() < 0.3:
        prover.run_untrusted(_tamper(rng, req, layout))
    if rng.random() < 0.1:
        device.machine.dma.add(DmaEvent(device.cycle + rng.randrange(1, 80), "write", SCRATCH, 0))
    prover.xprove(req.chal)
    return device


def end_to_end_fuzz(
    n_traces: int,
    seed: int = 0,
    tables: Optional[Sequence[SubmoduleTable]] = None,
) -> FuzzReport:
    """Run n randomised scenarios; every trace must pass the catalog and the end-to-end property."""
    if n_traces < 1:
        raise ValueError("n_traces must be at least 1")
    report = FuzzReport(n_traces=n_traces, seed=seed)
    for trial in range(n_traces):
        device = run_trial(trial, seed, tables)
        tr = PropTrace.from_device(device)
        report.cycles += len(tr)
        exec_col, in_cr = tr.column("exec"), tr.column("pc_in_cr")
        if any(e and c for e, c in zip(exec_col, in_cr)):
            report.proofs += 1
        failures = check_trace(tr, source=f"trial {trial}").failures()
        if failures:
            cycles = [v.first_violation for v in failures if v.first_violation is not None]
            report.discrepancies.append(
                FuzzDiscrepancy(
                    trial=trial,
                    failed=[v.name for v in failures],
                    first_cycle=min(cycles) if cycles else None,
                )
            )
            logger.warning("trial %d: %s failed", trial, ", ".join(v.name for v in failures))
    logger.info(
        "fuzzed %d traces (%d cycles, %d proofs): %d discrepancies",
        n_traces,
        report.cycles,
        report.proofs,
        len(report.discrepancies),
    )
    return report
