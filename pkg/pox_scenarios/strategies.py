"""
The adversary library: the honest prover plus one strategy per known attack
on PoX. Every strategy must end with the verifier rejecting, or with an
accepted proof that is backed by a genuine execution and its real output.
"""

from typing import Dict, Optional, Type, Union

from mcu_machine.isa import Instruction, Opcode

from pox_monitor.metadata import CHAL_SIZE, field_bytes
from pox_protocol.prover import store_bytes
from pox_protocol.wire import Response
from sw_att.crypto import MAC_SIZE

from pox_scenarios.base_strategy import AdversaryStrategy, GameContext
from pox_scenarios.errors import UnknownStrategy
from pox_scenarios.programs import constant_source

SCRATCH = 0x5000


class HonestProver(AdversaryStrategy):
    name = "honest"
    attack = "none: install, execute, prove"

    def play(self, ctx: GameContext) -> Optional[Response]:
        return ctx.prover.handle(ctx.request())


class ForgeGuess(AdversaryStrategy):
    name = "forge_guess"
    attack = "answer with a guessed MAC without calling SW-Att"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        if ctx.rng.random() < 0.5:
            self.honest_execution(ctx, req)
            o = ctx.device.output()
        else:
            o = ctx.rng.randbytes(ctx.or_len)
        return Response(h=ctx.rng.randbytes(MAC_SIZE), o=o)


class WrongRegion(AdversaryStrategy):
    name = "wrong_region"
    attack = "run S from different ER bounds"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        er_min, er_max = ctx.er
        layout = ctx.device.layout
        shift = 0x100 * ctx.rng.randint(1, 8)
        if er_max + shift > layout.prog.end:
            shift = -shift
        if er_min + shift < layout.prog.start:
            # no room to move S; keep er_min but claim a longer ER
            moved = (er_min, er_max + 4 * ctx.rng.randint(1, 4))
        else:
            moved = (er_min + shift, er_max + shift)
        s = ctx.build(ctx.source, moved)
        ctx.prover.install(req.model_copy(update={"er_min": moved[0], "er_max": moved[1], "s": s}))
        ctx.prover.xatomic_exec()
        return ctx.prover.xprove(req.chal)


class WrongCode(AdversaryStrategy):
    name = "wrong_code"
    attack = "run different code in the requested ER"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        or_min = ctx.or_[0] if ctx.or_ else SCRATCH
        payload = constant_source(or_min, max(ctx.or_len, 1), ctx.rng.randrange(256))
        ctx.prover.install(req.model_copy(update={"s": ctx.build(payload)}))
        ctx.prover.xatomic_exec()
        return ctx.prover.xprove(req.chal)


class TamperOutput(AdversaryStrategy):
    name = "tamper_output"
    attack = "change OR between execution and proof, or change o in the response"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        self.honest_execution(ctx, req)
        if ctx.or_ is None:
            ctx.prover.run_untrusted(store_bytes(SCRATCH, b"\x01"))
            return ctx.prover.xprove(req.chal)
        index = ctx.rng.randrange(ctx.or_len)
        if ctx.rng.random() < 0.5:
            addr = ctx.or_[0] + index
            value = ctx.device.machine.peek(addr)[0] ^ ctx.rng.randint(1, 255)
            ctx.prover.run_untrusted(store_bytes(addr, bytes([value])))
            return ctx.prover.xprove(req.chal)
        resp = ctx.prover.xprove(req.chal)
        o = bytearray(resp.o)
        o[index] ^= ctx.rng.randint(1, 255)
        return resp.model_copy(update={"o": bytes(o)})


class OverwriteAfterExec(AdversaryStrategy):
    name = "overwrite_after_exec"
    attack = "after running S, run other code in ER and put S back before proving"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        self.honest_execution(ctx, req)
        or_min = ctx.or_[0] if ctx.or_ else SCRATCH
        other = ctx.build(constant_source(or_min, max(ctx.or_len, 1), ctx.rng.randrange(256)))
        ctx.prover.run_untrusted(store_bytes(ctx.er[0], other))
        ctx.prover.xatomic_exec()
        if ctx.rng.random() < 0.8:
            ctx.prover.run_untrusted(store_bytes(ctx.er[0], ctx.s))
        return ctx.prover.xprove(req.chal)


class InterruptResume(AdversaryStrategy):
    name = "interrupt_resume"
    attack = "interrupt S and resume it at the same or a different instruction"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        ctx.prover.install(req)
        if ctx.rng.random() < 0.5:
            ctx.load_handler("RETI")
        else:
            ctx.load_handler(f"JMP 0x{ctx.mid_er():04X}")
        ctx.irq_in(ctx.rng.randint(3, 30))
        ctx.prover.xatomic_exec()
        return ctx.prover.xprove(req.chal)


class JumpMidEntry(AdversaryStrategy):
    name = "jump_mid_entry"
    attack = "enter ER past its first instruction"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        ctx.prover.install(req)
        op = Opcode.CALL if ctx.rng.random() < 0.5 else Opcode.JMP
        ctx.prover.run_untrusted([Instruction(op, imm=ctx.mid_er())], budget=ctx.prover.budget)
        return ctx.prover.xprove(req.chal)


class DmaMidExec(AdversaryStrategy):
    name = "dma_mid_exec"
    attack = "DMA into OR, ER or RAM while S runs"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        ctx.prover.install(req)
        targets = [SCRATCH, ctx.er[0] + ctx.rng.randrange(ctx.er[1] - ctx.er[0] + 1)]
        if ctx.or_ is not None:
            targets.append(ctx.rng.randint(*ctx.or_))
        op = "read" if ctx.rng.random() < 0.3 else "write"
        ctx.dma_in(ctx.rng.randint(3, 30), ctx.rng.choice(targets), op, ctx.rng.randrange(256))
        ctx.prover.xatomic_exec()
        return ctx.prover.xprove(req.chal)


class MetadataTamper(AdversaryStrategy):
    name = "metadata_tamper"
    attack = "change METADATA after execution, optionally restoring it before proving"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        self.honest_execution(ctx, req)
        base = ctx.device.layout.metadata.start
        field = ctx.rng.choice(("er_min", "er_max", "or_min", "or_max", "chal"))
        original = getattr(req, field)
        if field == "chal":
            forged = ctx.rng.randbytes(CHAL_SIZE)
        else:
            forged = (original + 4 * ctx.rng.randint(1, 8)) & 0xFFFF
        offset, raw = field_bytes(field, forged)
        if ctx.rng.random() < 0.5:
            ctx.prover.run_untrusted(store_bytes(base + offset, raw))
        else:
            for k, value in enumerate(raw):
                ctx.dma_in(k, base + offset + k, "write", value)
            ctx.device.run()
        if ctx.rng.random() < 0.7:
            offset, raw = field_bytes(field, original)
            ctx.prover.run_untrusted(store_bytes(base + offset, raw))
        return ctx.prover.xprove(req.chal)


class ReplayChal(AdversaryStrategy):
    name = "replay_chal"
    attack = "execute once, then answer a new challenge without executing again"

    def play(self, ctx: GameContext) -> Optional[Response]:
        first = ctx.request()
        ctx.query(first, ctx.prover.handle(first))
        req = ctx.request()
        if ctx.rng.random() < 0.5:
            # fresh challenge in METADATA, old execution untouched otherwise
            offset, raw = field_bytes("chal", req.chal)
            ctx.prover.run_untrusted(store_bytes(ctx.device.layout.metadata.start + offset, raw))
        return ctx.prover.xprove(req.chal)


class ResetMidExec(AdversaryStrategy):
    name = "reset_mid_exec"
    attack = "reset the device while S runs, then finish S from the middle"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        ctx.prover.install(req)
        ctx.reset_in(ctx.rng.randint(3, 30))
        ctx.prover.xatomic_exec()
        ctx.prover.run_untrusted([Instruction(Opcode.CALL, imm=ctx.mid_er())], budget=ctx.prover.budget)
        return ctx.prover.xprove(req.chal)


class IncompleteExec(AdversaryStrategy):
    name = "incomplete_exec"
    attack = "prove before S runs to completion"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        ctx.prover.install(req)
        if ctx.rng.random() < 0.5:
            resp = ctx.prover.xprove(req.chal)
            ctx.prover.xatomic_exec()
            return resp
        ctx.prover.xatomic_exec(budget=ctx.rng.randint(2, 20))
        return ctx.prover.xprove(req.chal)


class StackSmashOutput(AdversaryStrategy):
    name = "stack_smash_output"
    attack = "after running S, push onto OR through nested CALLs or an interrupt entry"

    def play(self, ctx: GameContext) -> Optional[Response]:
        req = ctx.request()
        self.honest_execution(ctx, req)
        layout = ctx.device.layout
        top = layout.stack_top
        target = ctx.rng.randint(*ctx.or_) if ctx.or_ else top - 1
        pushes = max((top - target + 1) // 2, 1)
        via_irq = ctx.rng.random() < 0.5
        descent = pushes - 1 if via_irq else pushes
        if descent:
            # CALL to itself: one push per two cycles
            ctx.prover.run_untrusted([Instruction(Opcode.CALL, imm=layout.aux.start)], budget=2 * descent)
        if via_irq:
            ctx.load_handler("HALT")
            ctx.prover.run_untrusted("HALT")
            ctx.irq_in(0)
            ctx.device.run()
        return ctx.prover.xprove(req.chal)


STRATEGIES: Dict[str, Type[AdversaryStrategy]] = {
    cls.name: cls
    for cls in (
        HonestProver,
        ForgeGuess,
        WrongRegion,
        WrongCode,
        TamperOutput,
        OverwriteAfterExec,
        InterruptResume,
        JumpMidEntry,
        DmaMidExec,
        MetadataTamper,
        ReplayChal,
        ResetMidExec,
        IncompleteExec,
        StackSmashOutput,
    )
}

ADVERSARIES = tuple(name for name in STRATEGIES if name != HonestProver.name)


def get_strategy(strategy: Union[str, AdversaryStrategy, Type[AdversaryStrategy]]) -> AdversaryStrategy:
    if isinstance(strategy, AdversaryStrategy):
        return strategy
    if isinstance(strategy, type) and issubclass(strategy, AdversaryStrategy):
        return strategy()
    try:
        return STRATEGIES[strategy]()
    except KeyError:
        raise UnknownStrategy(str(strategy), STRATEGIES) from None
