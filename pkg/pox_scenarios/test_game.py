"""
Tests for the security game: the honest prover always wins the verifier
over, and no adversary strategy ever gets an unbacked proof accepted.
"""

import dataclasses
import random

import pytest

from mcu_machine import DEFAULT_LAYOUT, GpioPort
from pox_config import load_settings
from pox_protocol import PoxDevice, Verifier
from sw_att import KEY_SIZE, SwAttTiming, derive_key, hmac_sha256, serialize_fields

from pox_scenarios import (
    ADVERSARIES,
    GAME_ER_MIN,
    GAME_EXEC_BUDGET,
    GAME_OR,
    READING_BITS,
    STRATEGIES,
    AdversaryStrategy,
    GameContext,
    UnknownStrategy,
    game_program,
    get_strategy,
    pick_output_region,
    play_trial,
    run_security_game,
    run_security_game_async,
    sensor_reading,
)
from pox_scenarios.strategies import HonestProver, StackSmashOutput, TamperOutput, WrongCode

SETTINGS = load_settings(seed=0, attest_timing="fast", game_concurrency=4)


def make_context(seed: int = 0, or_=GAME_OR):
    rng = random.Random(seed)
    key = rng.randbytes(KEY_SIZE)
    device = PoxDevice(key, timing=SwAttTiming.fast(), gpio=GpioPort.scripted(seed, READING_BITS))
    verifier = Verifier(key, clock=lambda: device.cycle, rng=rng)
    program, source = game_program(GAME_ER_MIN, or_)
    ctx = GameContext(0, rng, device, verifier, program, source, or_, GAME_EXEC_BUDGET)
    return key, ctx


class Silent(AdversaryStrategy):
    name = "silent"
    attack = "take the challenge and never answer"

    def play(self, ctx):
        ctx.request()
        return None


class Crashing(AdversaryStrategy):
    name = "crashing"
    attack = "none; the strategy itself fails"

    def play(self, ctx):
        raise RuntimeError("strategy bug")


class TestHonest:
    def test_honest_prover_always_accepted(self):
        result = run_security_game("honest", 100, seed=0, settings=SETTINGS)
        assert result.accepts == 100
        assert result.wins == 0 and result.errors == 0
        assert all(t.executed for t in result.transcripts)

    def test_honest_output_is_the_sensor_reading(self):
        _, ctx = make_context(seed=5)
        resp = HonestProver().play(ctx)
        assert resp.o == sensor_reading(GpioPort.scripted(5, READING_BITS).input_bits)
        assert ctx.witness.output == resp.o
        assert ctx.verifier.xverify(resp, ctx.challenge.chal) == 1

    def test_transcripts_in_trial_order(self):
        result = run_security_game("honest", 12, seed=3, settings=SETTINGS)
        assert [t.trial for t in result.transcripts] == list(range(12))

    @pytest.mark.slow
    def test_calibrated_timing(self):
        settings = load_settings(seed=0, attest_timing="calibrated", game_concurrency=2)
        result = run_security_game("honest", 2, seed=0, settings=settings)
        assert result.accepts == 2 and result.errors == 0

    def test_deterministic_for_a_seed(self):
        a = run_security_game("interrupt_resume", 10, seed=9, settings=SETTINGS)
        b = run_security_game("interrupt_resume", 10, seed=9, settings=SETTINGS)
        assert a.to_text() == b.to_text()


class TestAdversaries:
    def test_library(self):
        assert "honest" in STRATEGIES
        assert "honest" not in ADVERSARIES
        assert len(ADVERSARIES) == 13

    @pytest.mark.parametrize("name", ADVERSARIES)
    def test_no_adversary_wins(self, name):
        result = run_security_game(name, 40, seed=1, settings=SETTINGS)
        assert result.errors == 0, result.to_text()
        assert result.wins == 0, result.to_text()

    @pytest.mark.parametrize("name", [n for n in ADVERSARIES if n not in ("forge_guess", "replay_chal")])
    def test_attacks_are_rejected(self, name):
        result = run_security_game(name, 20, seed=2, settings=SETTINGS)
        genuine_accepts = sum(t.verdict and t.executed for t in result.transcripts)
        assert result.accepts == genuine_accepts

    async def test_async_game(self):
        result = await run_security_game_async("dma_mid_exec", 16, seed=4, settings=SETTINGS)
        assert result.trials == 16 and result.wins == 0

    def test_forge_guess(self):
        result = run_security_game("forge_guess", 500, seed=0, settings=SETTINGS)
        assert result.accepts == 0 and result.wins == 0

    @pytest.mark.slow
    def test_forge_guess_long_run(self):
        result = run_security_game("forge_guess", 100_000, seed=0, settings=SETTINGS.model_copy(update={"game_concurrency": 16}))
        assert result.wins == 0

    def test_tamper_output_every_position(self):
        for index in range(GAME_OR[1] - GAME_OR[0] + 1):
            _, ctx = make_context(seed=index)
            req = ctx.request()
            HonestProver().honest_execution(ctx, req)
            resp = ctx.prover.xprove(req.chal)
            o = bytearray(resp.o)
            o[index] ^= 0x01
            assert ctx.verifier.xverify(resp.model_copy(update={"o": bytes(o)}), req.chal) == 0

    def test_tamper_output_strategy(self):
        _, ctx = make_context(seed=11)
        resp = TamperOutput().play(ctx)
        assert ctx.verifier.xverify(resp, ctx.challenge.chal) == 0

    def test_stack_smash_output_rejected(self):
        top = DEFAULT_LAYOUT.stack_top
        for seed in range(12):
            _, ctx = make_context(seed=seed, or_=(top - 7, top - 3))
            resp = StackSmashOutput().play(ctx)
            assert ctx.witness.executed
            assert ctx.verifier.xverify(resp, ctx.challenge.chal) == 0
            lo, hi = ctx.or_
            er_min, er_max = ctx.er
            pushed = [s for s in ctx.device.trace if s.w_en and lo <= s.d_addr <= hi and not er_min <= s.pc <= er_max]
            assert pushed and all(s.pc in DEFAULT_LAYOUT.aux for s in pushed)

    def test_wrong_code_mac_covers_actual_memory(self):
        key, ctx = make_context(seed=7)
        resp = WrongCode().play(ctx)
        er_min, er_max = ctx.er
        actual = ctx.device.machine.peek(er_min, er_max - er_min + 1)
        assert actual != ctx.s
        md = ctx.device.metadata()
        k = derive_key(key, ctx.challenge.chal)
        candidates = {hmac_sha256(k, serialize_fields(actual, resp.o, dataclasses.replace(md, exec=e))) for e in (0, 1)}
        assert resp.h in candidates
        session = ctx.verifier.sessions[ctx.challenge.chal]
        assert resp.h != ctx.verifier.expected_h(session, resp.o)
        assert ctx.verifier.xverify(resp, ctx.challenge.chal) == 0


class TestOutputRegion:
    def test_draw_stays_in_data_region(self):
        rng = random.Random(0)
        data = DEFAULT_LAYOUT.data
        draws = [pick_output_region(rng, DEFAULT_LAYOUT) for _ in range(200)]
        assert all(data.start <= lo and hi <= DEFAULT_LAYOUT.stack_top - 3 and hi - lo == 4 for lo, hi in draws)
        ends = {hi for _, hi in draws}
        assert {DEFAULT_LAYOUT.stack_top - 3, DEFAULT_LAYOUT.stack_top - 4} <= ends
        assert len(ends) > 10

    def test_honest_output_next_to_stack(self):
        top = DEFAULT_LAYOUT.stack_top
        _, ctx = make_context(seed=3, or_=(top - 7, top - 3))
        resp = HonestProver().play(ctx)
        assert ctx.verifier.xverify(resp, ctx.challenge.chal) == 1
        assert resp.o == ctx.witness.output
        # the return address of the CALL into S sits right above OR
        assert any(s.w_en and s.d_addr == top - 1 and s.pc == DEFAULT_LAYOUT.aux.start for s in ctx.device.trace)
        er_min, er_max = ctx.er
        assert not any(s.w_en and top - 7 <= s.d_addr <= top - 3 and not er_min <= s.pc <= er_max for s in ctx.device.trace)

    def test_transcripts_record_output_region(self):
        result = run_security_game("honest", 30, seed=6, settings=SETTINGS)
        assert result.accepts == 30
        ranges = {t.or_range for t in result.transcripts}
        assert len(ranges) > 2
        near_stack = (f"{DEFAULT_LAYOUT.stack_top - 3:04X}", f"{DEFAULT_LAYOUT.stack_top - 4:04X}")
        assert any(r.endswith(near_stack) for r in ranges)

    def test_fixed_output_region(self):
        transcript = play_trial(HonestProver(), 0, 0, SETTINGS, or_=GAME_OR)
        assert transcript.or_range == "4000-4004" and transcript.verdict == 1


class TestGameHarness:
    def test_unknown_strategy(self):
        with pytest.raises(UnknownStrategy, match="no_such"):
            run_security_game("no_such", 1, settings=SETTINGS)
        with pytest.raises(KeyError):
            get_strategy("no_such")

    def test_strategy_forms(self):
        assert isinstance(get_strategy(HonestProver), HonestProver)
        honest = HonestProver()
        assert get_strategy(honest) is honest

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            run_security_game("honest", 0, settings=SETTINGS)

    def test_silent_adversary(self):
        transcript = play_trial(Silent(), 0, 0, SETTINGS)
        assert transcript.verdict == 0 and not transcript.win and transcript.h == ""

    def test_crashing_strategy_is_recorded(self):
        result = run_security_game(Crashing(), 3, settings=SETTINGS)
        assert result.errors == 3 and result.wins == 0 and result.accepts == 0
        assert "strategy bug" in result.transcripts[0].error

    def test_report_text(self):
        text = run_security_game("wrong_region", 2, seed=0, settings=SETTINGS).to_text()
        assert text.startswith("strategy: wrong_region\n")
        assert "adversary wins: 0" in text
        assert text.count("trial ") == 2
