"""
Declarative scenarios: an ER program, the events around its execution and
the adversary hooks applied to one PoX round, with the verdict it must get.

Scenario files are JSON documents in definitions/. Addresses may be written
as integers or as "0x..." strings.
"""

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, BeforeValidator, Field, model_validator
from typing_extensions import Annotated

from mcu_machine.assembler import Program, assemble
from mcu_machine.errors import AssemblyError
from mcu_machine.events import DmaEvent, IrqEvent, ResetEvent
from mcu_machine.layout import DEFAULT_LAYOUT, MemoryLayout
from mcu_machine.peripherals import GpioPort

from pox_config import PoxSettings, load_settings
from pox_monitor.metadata import MetadataField, field_bytes
from pox_protocol.device import PoxDevice
from pox_protocol.prover import Prover, store_bytes
from pox_protocol.verifier import Verifier
from pox_protocol.wire import Request, Response
from sw_att.attest import SwAttTiming
from sw_att.crypto import KEY_SIZE

from pox_scenarios.builder import build_program, required_size
from pox_scenarios.errors import ScenarioError
from pox_scenarios.programs import PROGRAMS, READING_BITS

logger = logging.getLogger(__name__)

DEFINITIONS_DIR = Path(__file__).parent / "definitions"


def _int(value):
    if isinstance(value, str):
        return int(value, 0)
    return value


Address = Annotated[int, BeforeValidator(_int), Field(ge=0, le=0xFFFF)]
Phase = Literal["before_exec", "after_exec"]


class DmaSpec(BaseModel):
    after: int = Field(..., ge=0, description="Cycles after the execution call starts")
    op: Literal["read", "write"] = "write"
    addr: Address
    value: int = Field(0, ge=0, le=0xFF)


class IrqSpec(BaseModel):
    after: int = Field(..., ge=0, description="Cycles after the execution call starts")
    vector: Address


class ResetSpec(BaseModel):
    after: int = Field(..., ge=0, description="Cycles after the execution call starts")


class CodeBlock(BaseModel):
    """Untrusted code placed outside ER: interrupt handlers, external routines."""

    addr: Address
    source: str


class MemoryWrite(BaseModel):
    phase: Phase = "after_exec"
    addr: Address
    data: str = Field(..., description="Bytes to write, as hex")

    @property
    def payload(self) -> bytes:
        return bytes.fromhex(self.data)


class MetadataWrite(BaseModel):
    phase: Phase = "after_exec"
    field: MetadataField
    value: Union[int, str]


class ResponseTamper(BaseModel):
    """Flip bits of one byte of the response on its way to the verifier."""

    part: Literal["h", "o"] = "o"
    index: int = Field(0, ge=0)
    xor: int = Field(0x01, ge=1, le=0xFF)

    def apply(self, resp: Response) -> Response:
        raw = bytearray(getattr(resp, self.part))
        if self.index >= len(raw):
            raise ScenarioError(f"response {self.part} has no byte {self.index}")
        raw[self.index] ^= self.xor
        return resp.model_copy(update={self.part: bytes(raw)})


class Scenario(BaseModel):
    name: str
    description: str = ""
    program: str = Field(..., description="Built-in program name, or an assembly file next to the scenario file")
    build: bool = Field(True, description="Lay the program out with build_program; false assembles it verbatim")
    er_min: Address = 0xE000
    er_max: Optional[Address] = Field(None, description="Defaults to the smallest ER that fits the program")
    or_min: Optional[Address] = None
    or_max: Optional[Address] = None
    layout: Dict[str, Dict[str, Address]] = Field(default_factory=dict, description="Layout region overrides")
    gpio_seed: Optional[int] = Field(None, description="Seed of the sensor line; defaults to the run seed")
    gpio_bits: int = Field(0, ge=0, description="Scripted sensor bits on P4IN")
    aux_code: List[CodeBlock] = Field(default_factory=list)
    dma: List[DmaSpec] = Field(default_factory=list)
    irqs: List[IrqSpec] = Field(default_factory=list)
    resets: List[ResetSpec] = Field(default_factory=list)
    writes: List[MemoryWrite] = Field(default_factory=list)
    metadata_writes: List[MetadataWrite] = Field(default_factory=list)
    tamper: Optional[ResponseTamper] = None
    expected: Literal["accept", "reject"] = "accept"
    base_dir: Optional[Path] = Field(None, exclude=True)

    @model_validator(mode="after")
    def _check(self):
        if (self.or_min is None) != (self.or_max is None):
            raise ValueError("or_min and or_max go together")
        if self.expected == "accept" and self.has_hooks:
            raise ValueError("only hook-free runs can expect accept")
        return self

    @property
    def has_hooks(self) -> bool:
        return bool(self.dma or self.irqs or self.resets or self.writes or self.metadata_writes or self.tamper)

    @property
    def or_bounds(self) -> Optional[Tuple[int, int]]:
        if self.or_min is None:
            return None
        return self.or_min, self.or_max

    def source(self) -> str:
        if self.program in PROGRAMS:
            return PROGRAMS[self.program](self.or_min if self.or_min is not None else 0)
        path = Path(self.program)
        if not path.is_absolute():
            path = (self.base_dir or DEFINITIONS_DIR) / path
        if not path.exists():
            raise ScenarioError(f"{self.name}: no built-in program or file named {self.program!r}")
        return path.read_text(encoding="utf-8")

    def layout_model(self) -> MemoryLayout:
        return DEFAULT_LAYOUT.with_overrides(self.layout) if self.layout else DEFAULT_LAYOUT

    def assemble(self, layout: Optional[MemoryLayout] = None) -> Program:
        """The ER image this scenario's verifier asks for."""
        layout = layout or self.layout_model()
        source = self.source()
        if self.build:
            er_max = self.er_max if self.er_max is not None else self.er_min + required_size(source) - 1
            return build_program(source, (self.er_min, er_max), layout)
        try:
            program = assemble(source, origin=self.er_min, region=layout.prog if self.er_min in layout.prog else None)
        except AssemblyError as e:
            raise ScenarioError(f"{self.name}: {e}") from e
        if self.er_max is not None and self.er_max != program.end:
            raise ScenarioError(f"{self.name}: verbatim program ends at 0x{program.end:04X}, not er_max")
        return program


@dataclass
class ScenarioRun:
    scenario: Scenario
    device: PoxDevice
    program: Program
    request: Request
    response: Response
    verdict: int

    @property
    def expected_verdict(self) -> int:
        return int(self.scenario.expected == "accept")

    @property
    def passed(self) -> bool:
        return self.verdict == self.expected_verdict


def _apply_writes(scenario: Scenario, phase: str, prover: Prover) -> None:
    base = prover.layout.metadata.start
    code = []
    for w in scenario.writes:
        if w.phase == phase:
            code += store_bytes(w.addr, w.payload)
    for w in scenario.metadata_writes:
        if w.phase == phase:
            value = bytes.fromhex(w.value) if w.field == "chal" else _int(w.value)
            offset, raw = field_bytes(w.field, value)
            code += store_bytes(base + offset, raw)
    if code:
        logger.debug("%s: %d adversary instructions %s", scenario.name, len(code), phase)
        prover.run_untrusted(code)


def run_scenario(scenario: Scenario, seed: int = 0, settings: Optional[PoxSettings] = None) -> ScenarioRun:
    """One PoX round under the scenario's events and hooks."""
    settings = settings or load_settings()
    rng = random.Random(seed)
    layout = scenario.layout_model()
    program = scenario.assemble(layout)
    er = (program.origin, program.end)
    key = rng.randbytes(KEY_SIZE)

    gpio = None
    if scenario.gpio_bits:
        gpio_seed = scenario.gpio_seed if scenario.gpio_seed is not None else seed
        gpio = GpioPort.scripted(gpio_seed, scenario.gpio_bits, base=layout.gpio.start)
    device = PoxDevice(key, layout=layout, timing=SwAttTiming.named(settings.attest_timing), gpio=gpio)
    prover = Prover(device, budget=settings.exec_budget)
    verifier = Verifier(key, layout=layout, clock=lambda: device.cycle, timeout=settings.session_timeout, rng=rng)

    for block in scenario.aux_code:
        device.machine.load_image(block.addr, assemble(block.source, origin=block.addr).image)

    request = verifier.xrequest(program.image, er, scenario.or_bounds)
    prover.install(request)
    _apply_writes(scenario, "before_exec", prover)

    start = device.cycle
    m = device.machine
    m.dma.extend(DmaEvent(start + d.after, d.op, d.addr, d.value) for d in scenario.dma)
    m.irqs.extend(IrqEvent(start + i.after, i.vector) for i in scenario.irqs)
    m.resets.extend(ResetEvent(start + r.after) for r in scenario.resets)
    prover.xatomic_exec()
    _apply_writes(scenario, "after_exec", prover)

    response = prover.xprove(request.chal)
    if scenario.tamper is not None:
        response = scenario.tamper.apply(response)
    verdict = verifier.xverify(response, request.chal)
    logger.info("scenario %s: verdict %d (expected %s)", scenario.name, verdict, scenario.expected)
    return ScenarioRun(scenario, device, program, request, response, verdict)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: invalid JSON: {e.msg} (line {e.lineno})") from e
    return Scenario.model_validate({**data, "base_dir": path.parent})


def builtin_scenarios() -> Dict[str, Scenario]:
    scenarios = {}
    for path in sorted(DEFINITIONS_DIR.glob("*.json")):
        scenario = load_scenario(path)
        scenarios[scenario.name] = scenario
    return scenarios


def find_scenario(name_or_path: Union[str, Path]) -> Scenario:
    """A built-in scenario by name, or a scenario file by path."""
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        return load_scenario(path)
    scenarios = builtin_scenarios()
    if str(name_or_path) not in scenarios:
        raise ScenarioError(f"unknown scenario: {name_or_path} (built-in: {', '.join(scenarios)})")
    return scenarios[str(name_or_path)]


def scenario_fire_sensor(seed: int) -> Scenario:
    """The fire-sensor workload with its sensor line seeded by seed."""
    return find_scenario("fire_sensor").model_copy(update={"gpio_seed": seed, "gpio_bits": READING_BITS})
