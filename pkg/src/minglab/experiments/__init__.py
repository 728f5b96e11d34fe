from .config import COMMANDS, ConfigError, ExperimentConfig, load_config
from .runners import RUNNERS, Table, run

__all__ = ["COMMANDS", "ConfigError", "ExperimentConfig", "RUNNERS", "Table", "load_config", "run"]
