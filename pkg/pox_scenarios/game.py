"""
The PoX security game.

Each trial gives the adversary a fresh device and a fresh challenge. The
adversary wins a trial when the verifier accepts its answer although either
no genuine execution of S followed the challenge, or the output it reported
differs from the one that execution produced. Trials are independent and run
concurrently; results are reported in trial order.

Each trial draws its output region from the data region, half of the time
right under the two bytes the entry CALL pushes, where any further CALL or
interrupt entry pushes first.
"""

import asyncio
import logging
import random
from functools import lru_cache
from typing import List, Optional, Tuple, Type, Union

from pydantic import BaseModel, Field

from mcu_machine.assembler import Program
from mcu_machine.layout import MemoryLayout
from mcu_machine.peripherals import GpioPort

from pox_config import PoxSettings, load_settings
from pox_protocol.device import PoxDevice
from pox_protocol.verifier import Verifier
from sw_att.attest import SwAttTiming
from sw_att.crypto import KEY_SIZE

from pox_scenarios.base_strategy import AdversaryStrategy, GameContext
from pox_scenarios.builder import fit_program
from pox_scenarios.programs import READING_BITS, READING_FIELDS, fire_sensor_source
from pox_scenarios.strategies import get_strategy

logger = logging.getLogger(__name__)

GAME_ER_MIN = 0xE000
GAME_OR: Tuple[int, int] = (0x4000, 0x4004)
GAME_EXEC_BUDGET = 5_000
# share of trials whose output region ends under the entry return address
STACK_ADJACENT_SHARE = 0.5


class TrialTranscript(BaseModel):
    trial: int
    or_range: str = Field("", description="Output region of the trial, hex bounds")
    chal: str = Field("", description="Challenge of the answered session, hex")
    h: str = Field("", description="MAC in the adversary's answer, hex")
    o: str = Field("", description="Output in the adversary's answer, hex")
    verdict: int = 0
    executed: bool = Field(False, description="A genuine execution of S followed the challenge")
    win: bool = False
    error: Optional[str] = None

    def line(self) -> str:
        text = (
            f"trial {self.trial}: verdict {self.verdict} executed {int(self.executed)} win {int(self.win)}"
            f" or={self.or_range} chal={self.chal[:16]} h={self.h[:16]} o={self.o}"
        )
        if self.error:
            text += f" error={self.error}"
        return text


class GameResult(BaseModel):
    strategy: str
    trials: int
    seed: int
    wins: int = 0
    accepts: int = 0
    errors: int = 0
    transcripts: List[TrialTranscript] = Field(default_factory=list)

    def to_text(self, transcripts: bool = True) -> str:
        lines = [
            f"strategy: {self.strategy}",
            f"trials: {self.trials} (seed {self.seed})",
            f"accepts: {self.accepts}",
            f"adversary wins: {self.wins}",
            f"errors: {self.errors}",
        ]
        if transcripts:
            lines.extend(t.line() for t in self.transcripts)
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=512)
def game_program(er_min: int = GAME_ER_MIN, or_: Tuple[int, int] = GAME_OR) -> Tuple[Program, str]:
    """The fire-sensor workload, built for one output region."""
    source = fire_sensor_source(or_[0])
    return fit_program(source, er_min), source


def pick_output_region(rng: random.Random, layout: MemoryLayout, length: int = len(READING_FIELDS)) -> Tuple[int, int]:
    """Output region anywhere in the data region, often ending at stack_top - 3 or - 4.

    S writes all of OR, so OR never covers the return address of the CALL into S.
    """
    if rng.random() < STACK_ADJACENT_SHARE:
        or_max = layout.stack_top - 3 - rng.randrange(2)
    else:
        or_max = rng.randint(layout.data.start + length - 1, layout.stack_top - 3)
    return or_max - length + 1, or_max


def play_trial(
    strategy: AdversaryStrategy,
    trial: int,
    seed: int,
    settings: PoxSettings,
    or_: Optional[Tuple[int, int]] = None,
) -> TrialTranscript:
    """One round against a fresh device; or_ fixes the output region instead of drawing one."""
    rng = random.Random(seed + trial)
    key = rng.randbytes(KEY_SIZE)
    gpio = GpioPort.scripted(rng.randrange(2**32), READING_BITS)
    device = PoxDevice(key, timing=SwAttTiming.named(settings.attest_timing), gpio=gpio)
    verifier = Verifier(key, clock=lambda: device.cycle, timeout=settings.session_timeout, rng=rng)
    or_ = or_ or pick_output_region(rng, device.layout)
    program, source = game_program(GAME_ER_MIN, or_)
    ctx = GameContext(trial, rng, device, verifier, program, source, or_, GAME_EXEC_BUDGET)
    or_range = f"{or_[0]:04X}-{or_[1]:04X}"

    resp = strategy.play(ctx)
    if ctx.challenge is None:
        return TrialTranscript(trial=trial, or_range=or_range, error="strategy never asked for a challenge")
    chal = ctx.challenge.chal
    if resp is None:
        verifier.expire()
        return TrialTranscript(trial=trial, or_range=or_range, chal=chal.hex(), executed=ctx.witness.executed)

    verdict = verifier.xverify(resp, chal)
    genuine = ctx.witness.output
    win = bool(verdict) and (genuine is None or resp.o != genuine)
    if win:
        logger.error("trial %d: %s won (executed=%s)", trial, strategy.name, genuine is not None)
    return TrialTranscript(
        trial=trial,
        or_range=or_range,
        chal=chal.hex(),
        h=resp.h.hex(),
        o=resp.o.hex(),
        verdict=verdict,
        executed=genuine is not None,
        win=win,
    )


async def run_security_game_async(
    strategy: Union[str, AdversaryStrategy, Type[AdversaryStrategy]],
    trials: int,
    seed: int = 0,
    settings: Optional[PoxSettings] = None,
) -> GameResult:
    settings = settings or load_settings()
    adversary = get_strategy(strategy)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    semaphore = asyncio.Semaphore(settings.game_concurrency)

    async def one(trial: int) -> TrialTranscript:
        async with semaphore:
            return await asyncio.to_thread(play_trial, adversary, trial, seed, settings)

    results = await asyncio.gather(*(one(t) for t in range(trials)), return_exceptions=True)

    game = GameResult(strategy=adversary.name, trials=trials, seed=seed)
    for trial, result in enumerate(results):
        if isinstance(result, Exception):
            logger.warning("trial %d of %s failed: %s", trial, adversary.name, result)
            result = TrialTranscript(trial=trial, error=f"{type(result).__name__}: {result}")
        if result.error:
            game.errors += 1
        game.accepts += result.verdict
        game.wins += int(result.win)
        game.transcripts.append(result)
    logger.info("%s: %d trials, %d accepts, %d wins", adversary.name, trials, game.accepts, game.wins)
    return game


def run_security_game(
    strategy: Union[str, AdversaryStrategy, Type[AdversaryStrategy]],
    trials: int,
    seed: int = 0,
    settings: Optional[PoxSettings] = None,
) -> GameResult:
    """Play `trials` independent rounds of the game against one strategy."""
    return asyncio.run(run_security_game_async(strategy, trials, seed, settings))
