"""Scenario configuration, batch runner and command line."""
from vbct.harness.config import ConfigError, ScenarioConfig, dumps, load_config, loads
from vbct.harness.runner import run_scenario, verify_file

__all__ = ["ConfigError", "ScenarioConfig", "dumps", "load_config", "loads", "run_scenario", "verify_file"]
