from .assumptions import AssumptionReport, validate_assumptions
from .builtins import BUILTIN_CONFIGS, LIN1_CONFIG, SAT1_CONFIG, builtin_system
from .config import SystemConfig, format_system, parse_config, parse_system_config
from .system import Box, ChiSystem, eval_f, eval_g

__all__ = [
    "AssumptionReport", "validate_assumptions",
    "BUILTIN_CONFIGS", "LIN1_CONFIG", "SAT1_CONFIG", "builtin_system",
    "SystemConfig", "format_system", "parse_config", "parse_system_config",
    "Box", "ChiSystem", "eval_f", "eval_g",
]
