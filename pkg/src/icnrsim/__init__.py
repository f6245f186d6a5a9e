"""Monte Carlo simulator for integrated communication, navigation and remote sensing LEO constellations."""

from .config import format_config, parse_config, parse_config_text
from .scenario import ALL_LEVELS, IntegrationLevel, ScenarioConfig
from .simulator import MetricsReport, run_experiment, run_trial

__version__ = "0.1.0"

__all__ = [
    "ALL_LEVELS",
    "IntegrationLevel",
    "MetricsReport",
    "ScenarioConfig",
    "format_config",
    "parse_config",
    "parse_config_text",
    "run_experiment",
    "run_trial",
]
