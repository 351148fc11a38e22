"""
PoX scenarios

ER programs and the builder that lays them out, declarative attack
scenarios, and the adversary strategies of the security game.
"""

from pox_scenarios.base_strategy import AdversaryStrategy, GameContext
from pox_scenarios.builder import build_program, fit_program, required_size
from pox_scenarios.errors import BuildError, ScenarioError, UnknownStrategy
from pox_scenarios.game import (
    GAME_ER_MIN,
    GAME_EXEC_BUDGET,
    GAME_OR,
    GameResult,
    TrialTranscript,
    game_program,
    pick_output_region,
    play_trial,
    run_security_game,
    run_security_game_async,
)
from pox_scenarios.programs import (
    PROGRAMS,
    READING_BITS,
    constant_source,
    fire_sensor_source,
    sensor_alarm,
    sensor_reading,
    write42_source,
)
from pox_scenarios.scenario import (
    Scenario,
    ScenarioRun,
    builtin_scenarios,
    find_scenario,
    load_scenario,
    run_scenario,
    scenario_fire_sensor,
)
from pox_scenarios.strategies import ADVERSARIES, STRATEGIES, get_strategy
from pox_scenarios.witness import ExecutionWitness

__all__ = [
    "ADVERSARIES",
    "AdversaryStrategy",
    "BuildError",
    "ExecutionWitness",
    "GAME_ER_MIN",
    "GAME_EXEC_BUDGET",
    "GAME_OR",
    "GameContext",
    "GameResult",
    "PROGRAMS",
    "READING_BITS",
    "STRATEGIES",
    "Scenario",
    "ScenarioError",
    "ScenarioRun",
    "TrialTranscript",
    "UnknownStrategy",
    "build_program",
    "builtin_scenarios",
    "constant_source",
    "find_scenario",
    "fire_sensor_source",
    "fit_program",
    "game_program",
    "get_strategy",
    "load_scenario",
    "pick_output_region",
    "play_trial",
    "required_size",
    "run_scenario",
    "run_security_game",
    "run_security_game_async",
    "scenario_fire_sensor",
    "sensor_alarm",
    "sensor_reading",
    "write42_source",
]

__version__ = "0.1.0"
