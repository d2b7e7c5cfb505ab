"""Configuration module for the anisotropic walk verification engine"""

from .settings import (
    Settings,
    Environment,
    LogLevel,
    Engine,
    get_settings,
    reload_settings,
    ExactConfig,
    SimulationConfig,
    AnalysisConfig,
    OutputConfig,
    LoggingConfig,
)

__version__ = "1.0.0"

__all__ = [
    "Settings",
    "Environment",
    "LogLevel",
    "Engine",
    "get_settings",
    "reload_settings",
    "ExactConfig",
    "SimulationConfig",
    "AnalysisConfig",
    "OutputConfig",
    "LoggingConfig",
    "__version__",
]
