"""
Tests for the ER builder, the fire-sensor workload and the declarative
scenarios shipped in definitions/.
"""

import json

import pytest
from pydantic import ValidationError

from mcu_machine import GpioPort, Opcode
from mcu_machine.isa import decode_image
from pox_protocol import Response

from ltl_check import PropTrace, check_trace
from pox_scenarios import (
    READING_BITS,
    BuildError,
    Scenario,
    ScenarioError,
    build_program,
    builtin_scenarios,
    find_scenario,
    fit_program,
    fire_sensor_source,
    load_scenario,
    required_size,
    run_scenario,
    scenario_fire_sensor,
    sensor_alarm,
    sensor_reading,
    write42_source,
)
from pox_scenarios.scenario import ResponseTamper

ER = (0xE000, 0xE00F)
OR_MIN = 0x4000

TWO_EXITS = """\
    MOVI r0, 0
    JZ r0, skip
    MOVI r1, 5
    RET
skip:
    MOVI r1, 7
    RET
"""


def opcodes(program):
    return [ins.opcode for _, ins in decode_image(program.image, program.origin)]


def reading_oracle(bits):
    """Five bytes, MSB first, straight from the bit list."""
    return bytes(int("".join(str(b) for b in bits[8 * k : 8 * k + 8]), 2) for k in range(5))


class TestBuilder:
    def test_write42_layout(self):
        program = build_program(write42_source(OR_MIN), ER)
        assert opcodes(program) == [Opcode.MOVI, Opcode.STORE, Opcode.NOP, Opcode.RET]
        assert program.entry == ER[0]
        assert program.exit == ER[1] - 3
        assert program.end == ER[1]

    def test_every_ret_becomes_the_exit(self):
        program = build_program(TWO_EXITS, (0xE000, 0xE01F))
        code = [ins for _, ins in decode_image(program.image, program.origin)]
        assert [ins.opcode for ins in code] == [
            Opcode.MOVI,
            Opcode.JZ,
            Opcode.MOVI,
            Opcode.JMP,
            Opcode.MOVI,
            Opcode.NOP,
            Opcode.NOP,
            Opcode.RET,
        ]
        assert code[1].imm == 0xE010
        assert code[3].imm == program.exit == 0xE01C
        assert sum(ins.opcode is Opcode.RET for ins in code) == 1

    def test_required_size(self):
        assert required_size(write42_source(OR_MIN)) == 12
        assert required_size(TWO_EXITS) == 24
        assert fit_program(TWO_EXITS, 0xE000).end == 0xE017

    def test_external_call_refused(self):
        with pytest.raises(BuildError, match="atomicity"):
            build_program("CALL 0x0800\nRET", ER)

    def test_jump_out_of_er_refused(self):
        with pytest.raises(BuildError, match="leaves ER"):
            build_program("JMP 0x0800\nRET", ER)

    def test_internal_call_refused(self):
        with pytest.raises(BuildError, match="reserved"):
            build_program("CALL 0xE008\nRET\nNOP\nRET", ER)

    def test_halt_and_reti_refused(self):
        with pytest.raises(BuildError, match="HALT"):
            build_program("MOVI r0, 1\nHALT", ER)
        with pytest.raises(BuildError, match="RETI"):
            build_program("RETI", ER)

    def test_program_too_large(self):
        with pytest.raises(BuildError, match="needs 12 bytes"):
            build_program(write42_source(OR_MIN), (0xE000, 0xE007))

    @pytest.mark.parametrize("er", [(0xE000, 0xE002), (0xE000, 0xE005), (0x4000, 0x400F)])
    def test_bad_regions(self, er):
        with pytest.raises(BuildError):
            build_program(write42_source(OR_MIN), er)

    def test_assembly_errors_wrapped(self):
        with pytest.raises(BuildError, match="assembly failed"):
            build_program("FROB r0", ER)
        with pytest.raises(BuildError, match="empty"):
            build_program("; nothing here\n", ER)


class TestFireSensor:
    def test_reading_matches_sensor_line(self):
        run = run_scenario(scenario_fire_sensor(1), seed=1)
        bits = GpioPort.scripted(1, READING_BITS).input_bits
        assert run.verdict == 1 and run.passed
        assert run.response.o == reading_oracle(bits) == sensor_reading(bits)
        assert run.device.machine.gpio.bits_consumed == READING_BITS

    @pytest.mark.parametrize("seed", range(6))
    def test_buzzer_follows_temperature_msb(self, seed):
        run = run_scenario(scenario_fire_sensor(seed), seed=seed)
        bits = GpioPort.scripted(seed, READING_BITS).input_bits
        out_log = run.device.machine.gpio.out_log
        if sensor_alarm(bits):
            assert [value for _, value in out_log] == [1, 0]
        else:
            assert out_log == []
        assert run.verdict == 1

    def test_deterministic(self):
        a = run_scenario(scenario_fire_sensor(3), seed=3)
        b = run_scenario(scenario_fire_sensor(3), seed=3)
        assert a.response == b.response
        assert len(a.device.trace) == len(b.device.trace)

    def test_exec_high_while_attesting(self):
        run = run_scenario(scenario_fire_sensor(2), seed=2)
        cr = run.device.layout.cr
        in_cr = [snap for snap in run.device.trace if snap.pc in cr]
        assert in_cr and all(snap.exec == 1 for snap in in_cr)

    def test_trace_satisfies_catalog(self):
        run = run_scenario(scenario_fire_sensor(4), seed=4)
        report = check_trace(PropTrace.from_device(run.device), source="fire_sensor")
        assert report.passed

    def test_source_uses_or_address(self):
        assert ".equ OUT, 0x4100" in fire_sensor_source(0x4100)


class TestScenarios:
    def test_builtins_present(self):
        names = set(builtin_scenarios())
        assert {
            "fire_sensor",
            "write42",
            "external_call",
            "self_modifying",
            "interrupted",
            "output_overwrite",
            "dma_during_exec",
            "metadata_rewrite",
            "response_tamper",
        } <= names

    @pytest.mark.parametrize("name", sorted(builtin_scenarios()))
    def test_builtin_verdicts(self, name):
        run = run_scenario(find_scenario(name), seed=0)
        assert run.passed, f"{name}: verdict {run.verdict}, expected {run.scenario.expected}"

    @pytest.mark.parametrize("name", ["write42", "dma_during_exec", "interrupted", "metadata_rewrite"])
    def test_monitored_traces_satisfy_catalog(self, name):
        run = run_scenario(find_scenario(name), seed=0)
        assert check_trace(PropTrace.from_device(run.device), source=name).passed

    def test_write42_output(self):
        run = run_scenario(find_scenario("write42"))
        assert run.response.o == b"\x2a"

    def test_hex_addresses(self):
        scenario = Scenario(name="x", program="write42", er_min="0xE100", or_min="0x4000", or_max=0x4000)
        assert scenario.er_min == 0xE100
        assert scenario.assemble().end == 0xE10B

    def test_address_range_checked(self):
        with pytest.raises(ValidationError):
            Scenario(name="x", program="write42", er_min="0x10000")

    def test_or_bounds_go_together(self):
        with pytest.raises(ValidationError, match="go together"):
            Scenario(name="x", program="write42", or_min=0x4000)

    def test_accept_needs_no_hooks(self):
        with pytest.raises(ValidationError, match="hook-free"):
            Scenario(name="x", program="write42", tamper={"part": "o"}, expected="accept")

    def test_unknown_scenario(self):
        with pytest.raises(ScenarioError, match="unknown scenario"):
            find_scenario("no_such_scenario")

    def test_unknown_program(self):
        scenario = Scenario(name="x", program="missing.asm", expected="reject")
        with pytest.raises(ScenarioError, match="missing.asm"):
            scenario.source()

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json", encoding="utf-8")
        with pytest.raises(ScenarioError, match="invalid JSON"):
            load_scenario(path)

    def test_scenario_file_with_local_program(self, tmp_path):
        (tmp_path / "store7.asm").write_text("MOVI r0, 7\nSTORE r0, 0x4000\nRET\n", encoding="utf-8")
        path = tmp_path / "store7.json"
        path.write_text(
            json.dumps({"name": "store7", "program": "store7.asm", "or_min": "0x4000", "or_max": "0x4000"}),
            encoding="utf-8",
        )
        run = run_scenario(find_scenario(str(path)))
        assert run.verdict == 1 and run.response.o == b"\x07"

    def test_verbatim_program_must_end_at_er_max(self):
        scenario = Scenario(name="x", program="write42", build=False, er_max=0xE00F, or_min=0x4000, or_max=0x4000)
        with pytest.raises(ScenarioError, match="not er_max"):
            scenario.assemble()

    def test_verbatim_program_must_fit_prog(self):
        scenario = Scenario(name="x", program="write42", build=False, er_min=0xFFF8, or_min=0x4000, or_max=0x4000)
        with pytest.raises(ScenarioError, match="exceeds region"):
            scenario.assemble()

    def test_response_tamper(self):
        resp = Response(h=bytes(32), o=b"\x10\x20")
        assert ResponseTamper(part="o", index=1, xor=0x0F).apply(resp).o == b"\x10\x2f"
        assert ResponseTamper(part="h", index=0).apply(resp).h[0] == 1
        with pytest.raises(ScenarioError, match="no byte 2"):
            ResponseTamper(part="o", index=2).apply(resp)
