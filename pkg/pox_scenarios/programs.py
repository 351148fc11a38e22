"""
Honest ER workloads, as assembly source generated for a given OR address.
"""

from typing import Callable, Dict, List, Sequence

from mcu_machine.peripherals import P4IN, P4OUT

READING_FIELDS = ("humidity", "humidity_dec", "temperature", "temperature_dec", "checksum")
READING_BITS = 8 * len(READING_FIELDS)
TEMPERATURE_BYTE = READING_FIELDS.index("temperature")


def write42_source(or_min: int) -> str:
    return f"""\
; write 42 into the first OR byte
    MOVI r0, 42
    STORE r0, 0x{or_min:04X}
    RET
"""


def constant_source(or_min: int, or_len: int = 5, value: int = 0xFF) -> str:
    """Fill OR with one constant; the wrong-code adversary's payload."""
    lines = [f"    MOVI r0, {value}"]
    lines += [f"    STORE r0, 0x{or_min + k:04X}" for k in range(or_len)]
    lines.append("    RET")
    return "\n".join(lines) + "\n"


def _read_byte(k: int, bits: int) -> List[str]:
    """Shift `bits` sensor bits into r0, MSB first, and store r0 at OUT+k."""
    return [
        f"    MOVI r2, {bits}",
        f"bit{k}:",
        "    ADD r0, r0",
        "    LOAD r1, P4IN",
        "    ADD r0, r1",
        "    SUB r2, r3",
        f"    JZ r2, done{k}",
        f"    JMP bit{k}",
        f"done{k}:",
        f"    STORE r0, OUT+{k}",
    ]


def fire_sensor_source(or_min: int, p4in: int = P4IN, p4out: int = P4OUT) -> str:
    """Poll the sensor line for a 40-bit reading and copy it to OR.

    The reading is humidity, humidity decimals, temperature, temperature
    decimals and a checksum, each sent MSB first. A set temperature MSB
    pulses the buzzer on P4OUT.
    """
    lines = [
        "; fire sensor: 5-byte reading from the P4IN line into OR",
        f".equ P4IN, 0x{p4in:02X}",
        f".equ P4OUT, 0x{p4out:02X}",
        f".equ OUT, 0x{or_min:04X}",
        "    MOVI r3, 1",
    ]
    for k, name in enumerate(READING_FIELDS):
        lines.append(f"; {name}")
        lines.append("    MOVI r0, 0")
        if k == TEMPERATURE_BYTE:
            lines += [
                "    LOAD r1, P4IN",
                "    ADD r0, r1",
                "    JZ r1, no_alarm",
                "    STORE r1, P4OUT",
                "    MOVI r1, 0",
                "    STORE r1, P4OUT",
                "no_alarm:",
            ]
            lines += _read_byte(k, 7)
        else:
            lines += _read_byte(k, 8)
    lines.append("    RET")
    return "\n".join(lines) + "\n"


def sensor_reading(bits: Sequence[int]) -> bytes:
    """The 5 bytes the fire-sensor program leaves in OR for a bit stream."""
    padded = list(bits[:READING_BITS]) + [0] * max(READING_BITS - len(bits), 0)
    out = bytearray()
    for k in range(len(READING_FIELDS)):
        value = 0
        for bit in padded[8 * k : 8 * k + 8]:
            value = (value << 1) | (bit & 1)
        out.append(value)
    return bytes(out)


def sensor_alarm(bits: Sequence[int]) -> bool:
    return len(bits) > 8 * TEMPERATURE_BYTE and bits[8 * TEMPERATURE_BYTE] == 1


# name -> source generator taking OR's first address
PROGRAMS: Dict[str, Callable[[int], str]] = {
    "write42": write42_source,
    "fire_sensor": fire_sensor_source,
    "constant": constant_source,
}

OUTPUT_SIZES: Dict[str, int] = {
    "write42": 1,
    "fire_sensor": len(READING_FIELDS),
    "constant": 5,
}
