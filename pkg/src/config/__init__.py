"""
Configuration management package.

Provides validated, immutable experiment settings, environment-driven
process settings, and the flat key=value config file format.
"""

from .config_file import dump_run_config, load_run_config, parse_run_config
from .settings import (
    AppSettings,
    ConfigError,
    ModelParams,
    RunConfig,
    ScenarioConfig,
    TrackerConfig,
    TrackerMode,
    get_settings,
)

__all__ = [
    "AppSettings",
    "ConfigError",
    "ModelParams",
    "RunConfig",
    "ScenarioConfig",
    "TrackerConfig",
    "TrackerMode",
    "dump_run_config",
    "get_settings",
    "load_run_config",
    "parse_run_config",
]
