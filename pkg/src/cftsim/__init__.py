"""Discrete-event simulator for connection fault-tolerant commit processing of mobile transactions."""

from .config import ConfigError, ScenarioConfig, Variant, parse_config, parse_config_text
from .metrics import Decision, OutcomeRecord, ScenarioStats
from .protocol import UNLIMITED, ProtocolViolation
from .simulation import run_replications, run_scenario, simulate

__all__ = [
    "ConfigError",
    "Decision",
    "OutcomeRecord",
    "ProtocolViolation",
    "ScenarioConfig",
    "ScenarioStats",
    "UNLIMITED",
    "Variant",
    "parse_config",
    "parse_config_text",
    "run_replications",
    "run_scenario",
    "simulate",
]

__version__ = "0.1.0"
