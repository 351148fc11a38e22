"""
Runtime settings shared by the simulator, protocol, checker and CLI.

Values come from the environment (optionally a .env file) with the POX_ prefix.
"""

import os
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator


class PoxSettings(BaseModel):
    """Settings resolved once per process (or per test)."""

    seed: int = Field(0, description="Default seed for every command")
    attest_timing: Literal["fast", "calibrated"] = Field(
        "fast", description="SW-Att sweep timing profile used by simulations"
    )
    exec_budget: int = Field(100_000, description="Cycle budget for one atomic execution", gt=0)
    session_timeout: int = Field(
        10_000_000, description="Verifier session lifetime, in verifier clock units", gt=0
    )
    exhaustive_budget: int = Field(
        5_000_000, description="Largest frontier the exhaustive sub-module checker explores", gt=0
    )
    game_concurrency: int = Field(8, description="Security-game trials run concurrently", ge=1)
    log_level: str = Field("WARNING", description="Root logging level for the CLI")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        v = v.upper()
        if v not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level: {v}")
        return v


def _env_int(name: str) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw, 0)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e


def load_settings(**overrides) -> PoxSettings:
    """Build settings from POX_* environment variables; keyword overrides win."""
    load_dotenv()

    values = {}
    for field, env in (
        ("seed", "POX_SEED"),
        ("exec_budget", "POX_EXEC_BUDGET"),
        ("session_timeout", "POX_SESSION_TIMEOUT"),
        ("exhaustive_budget", "POX_EXHAUSTIVE_BUDGET"),
        ("game_concurrency", "POX_GAME_CONCURRENCY"),
    ):
        value = _env_int(env)
        if value is not None:
            values[field] = value

    timing = os.getenv("POX_ATTEST_TIMING")
    if timing:
        values["attest_timing"] = timing.strip().lower()
    level = os.getenv("POX_LOG_LEVEL")
    if level:
        values["log_level"] = level.strip()

    values.update({k: v for k, v in overrides.items() if v is not None})
    return PoxSettings(**values)
