"""
Prover-side PoX algorithms run by the device's untrusted auxiliary software.

Everything here happens through ordinary instructions placed in the aux
region, so every byte the prover writes shows up on the monitored wires.
Adversary strategies use the same entry points with altered arguments.
"""

import logging
from typing import List, Optional, Sequence, Union

from mcu_machine.assembler import assemble
from mcu_machine.errors import AssemblyError
from mcu_machine.isa import INSTRUCTION_SIZE, Instruction, Opcode, encode_all

from pox_monitor.metadata import CHAL_OFFSET, field_bytes
from pox_protocol.device import PoxDevice
from pox_protocol.errors import InstallError
from pox_protocol.wire import Request, Response

logger = logging.getLogger(__name__)

DEFAULT_EXEC_BUDGET = 100_000

UntrustedCode = Union[str, Sequence[Instruction]]


def store_bytes(addr: int, data: bytes) -> List[Instruction]:
    """MOVI/STORE sequence writing data at addr, one byte per STORE."""
    code: List[Instruction] = []
    last = None
    for offset, value in enumerate(data):
        if value != last:
            code.append(Instruction(Opcode.MOVI, ra=0, imm=value))
            last = value
        code.append(Instruction(Opcode.STORE, ra=0, imm=addr + offset))
    return code


class Prover:
    """Untrusted software of one PoX device."""

    def __init__(self, device: PoxDevice, budget: int = DEFAULT_EXEC_BUDGET):
        self.device = device
        self.budget = budget
        self.request: Optional[Request] = None
        self.completed = False

    @property
    def layout(self):
        return self.device.layout

    @property
    def capacity(self) -> int:
        """Instructions one untrusted program may hold, its trailing HALT included."""
        return self.layout.aux.size // INSTRUCTION_SIZE

    def run_untrusted(self, code: UntrustedCode, budget: Optional[int] = None) -> int:
        """Place code at aux.start and run it until the machine halts.

        Instruction lists longer than the aux region run in chunks, each ending
        in HALT. Returns the number of cycles stepped.
        """
        aux = self.layout.aux
        if isinstance(code, str):
            try:
                images = [assemble(code, origin=aux.start, region=aux).image]
            except AssemblyError as e:
                raise InstallError(f"untrusted program does not fit: {e}") from e
        else:
            code = list(code)
            per_chunk = self.capacity - 1
            images = [
                encode_all(code[i : i + per_chunk] + [Instruction(Opcode.HALT)])
                for i in range(0, max(len(code), 1), per_chunk)
            ]

        steps = 0
        for image in images:
            self.device.machine.load_image(aux.start, image)
            self.device.machine.redirect(aux.start)
            steps += self.device.run(None if budget is None else max(budget - steps, 0))
        return steps

    def install(self, req: Request) -> None:
        """Copy s into ER and write bounds and challenge into METADATA."""
        er_size = req.er_max - req.er_min + 1
        if req.s and len(req.s) > er_size:
            raise InstallError(f"s of {len(req.s)} bytes does not fit ER of {er_size} bytes")
        base = self.layout.metadata.start
        code: List[Instruction] = []
        if req.s:
            code += store_bytes(req.er_min, req.s)
        for name in ("er_min", "er_max", "or_min", "or_max"):
            offset, raw = field_bytes(name, getattr(req, name))
            code += store_bytes(base + offset, raw)
        code += store_bytes(base + CHAL_OFFSET, req.chal)
        self.request = req
        self.completed = False
        self.run_untrusted(code)
        logger.debug("installed ER [0x%04X,0x%04X] with %d bytes of s", req.er_min, req.er_max, len(req.s))

    def xatomic_exec(self, budget: Optional[int] = None) -> bytes:
        """CALL er_min from the runtime; returns the OR contents afterwards."""
        md = self.device.metadata()
        budget = budget or self.budget
        steps = self.run_untrusted([Instruction(Opcode.CALL, imm=md.er_min)], budget=budget)
        self.completed = steps < budget
        if not self.completed:
            logger.warning("execution of ER at 0x%04X did not finish in %d cycles", md.er_min, budget)
        return self.device.output()

    def xprove(self, chal: Optional[bytes] = None) -> Response:
        """Copy chal into MR, jump to SW-Att and return (h, OR contents)."""
        if chal is None:
            chal = self.request.chal if self.request is not None else self.device.metadata().chal
        layout = self.layout
        code = store_bytes(layout.mr.start, chal) + [Instruction(Opcode.JMP, imm=layout.cr.start)]
        budget = len(code) + self.device.sw_att.sweep_length(self.device.metadata()) + self.budget
        self.run_untrusted(code, budget=budget)
        h = self.device.machine.peek(layout.mr.start, 32)
        return Response(h=h, o=self.device.output())

    def handle(self, req: Request) -> Response:
        """Honest prover: install, execute, prove."""
        self.install(req)
        self.xatomic_exec()
        return self.xprove(req.chal)

    def serve_frame(self, frame: bytes) -> bytes:
        return self.handle(Request.decode(frame)).encode()
