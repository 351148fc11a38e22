"""
Base class for adversary strategies in the PoX security game.

An adversary has full control over the prover's software state: it can write
any memory the hardware does not protect, schedule interrupts and DMA, run
any code from the auxiliary region and call SW-Att whenever it likes. It
cannot write ROM, read the key outside ROM or write EXEC; the device
enforces that, not the strategy.
"""

import random
from abc import ABC, abstractmethod
from typing import ClassVar, Optional, Tuple

from mcu_machine.assembler import Program, assemble
from mcu_machine.events import DmaEvent, IrqEvent, ResetEvent
from mcu_machine.isa import INSTRUCTION_SIZE

from pox_protocol.device import PoxDevice
from pox_protocol.prover import Prover
from pox_protocol.verifier import Verifier
from pox_protocol.wire import Request, Response

from pox_scenarios.builder import build_program
from pox_scenarios.witness import ExecutionWitness

Bounds = Tuple[int, int]

HANDLER = 0x0800


class GameContext:
    """One trial: the challenger's verifier and the adversary's device."""

    def __init__(
        self,
        trial: int,
        rng: random.Random,
        device: PoxDevice,
        verifier: Verifier,
        program: Program,
        source: str,
        or_: Optional[Bounds],
        budget: int,
    ):
        self.trial = trial
        self.rng = rng
        self.device = device
        self.verifier = verifier
        self.prover = Prover(device, budget=budget)
        self.program = program
        self.source = source
        self.or_ = or_
        self.challenge: Optional[Request] = None
        self.witness: Optional[ExecutionWitness] = None

    @property
    def er(self) -> Bounds:
        return self.program.origin, self.program.end

    @property
    def s(self) -> bytes:
        return self.program.image

    @property
    def or_len(self) -> int:
        return 0 if self.or_ is None else self.or_[1] - self.or_[0] + 1

    def request(self) -> Request:
        """Ask the challenger for a fresh request; the latest one is the challenge."""
        req = self.verifier.xrequest(self.s, self.er, self.or_)
        if self.witness is not None:
            self.witness.detach()
        self.witness = ExecutionWitness(self.device.machine, self.s, self.er, self.or_).attach()
        self.challenge = req
        return req

    def query(self, req: Request, resp: Response) -> int:
        """Verification oracle for earlier sessions."""
        return self.verifier.xverify(resp, req.chal)

    def build(self, source: str, er: Optional[Bounds] = None) -> bytes:
        return build_program(source, er or self.er, self.device.layout).image

    # event scheduling, relative to the next cycle the device runs

    def irq_in(self, cycles: int, vector: int = HANDLER) -> None:
        self.device.machine.irqs.add(IrqEvent(self.device.cycle + cycles, vector))

    def dma_in(self, cycles: int, addr: int, op: str = "write", value: int = 0) -> None:
        self.device.machine.dma.add(DmaEvent(self.device.cycle + cycles, op, addr, value))

    def reset_in(self, cycles: int) -> None:
        self.device.machine.resets.add(ResetEvent(self.device.cycle + cycles))

    def load_handler(self, source: str, addr: int = HANDLER) -> None:
        self.device.machine.load_image(addr, assemble(source, origin=addr).image)

    def mid_er(self) -> int:
        """Address of a random instruction in ER other than the first."""
        slots = (self.er[1] - self.er[0] + 1) // INSTRUCTION_SIZE
        return self.er[0] + INSTRUCTION_SIZE * self.rng.randrange(1, max(slots, 2))


class AdversaryStrategy(ABC):
    """One attack on the PoX protocol."""

    name: ClassVar[str] = ""
    attack: ClassVar[str] = ""

    @abstractmethod
    def play(self, ctx: GameContext) -> Optional[Response]:
        """Act on the device and answer the challenge (None: never answer)."""

    def honest_execution(self, ctx: GameContext, req: Request) -> None:
        ctx.prover.install(req)
        ctx.prover.xatomic_exec()

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"
