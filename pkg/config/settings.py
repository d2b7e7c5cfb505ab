"""
Configuration management for the anisotropic walk verification engine
Supports environment-based configuration with validation
"""

import os
from typing import Optional
from enum import Enum
from dotenv import load_dotenv
from dataclasses import dataclass, field

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


class Environment(str, Enum):
    """Application environment"""
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class LogLevel(str, Enum):
    """Logging levels"""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class Engine(str, Enum):
    """Monte Carlo engines"""
    DIRECT = "direct"
    EMBEDDING = "embedding"


@dataclass
class ExactConfig:
    """Exact dynamic-programming configuration"""
    cap_constant: float = field(default_factory=lambda: float(os.getenv("WALK_CAP_CONSTANT", "4.0")))
    max_trunc_loss: float = field(default_factory=lambda: float(os.getenv("WALK_MAX_TRUNC_LOSS", "1e-9")))
    mass_tolerance: float = field(default_factory=lambda: float(os.getenv("WALK_MASS_TOLERANCE", "1e-12")))
    brute_force_max_steps: int = 12
    distribution_oracle_max_steps: int = 10
    green_exact_max_steps: int = field(
        default_factory=lambda: int(os.getenv("WALK_GREEN_EXACT_MAX_STEPS", "4000"))
    )

    def validate(self):
        """Validate exact-engine configuration"""
        if self.cap_constant <= 0:
            raise ValueError("WALK_CAP_CONSTANT must be positive")
        if not 0 < self.max_trunc_loss < 1:
            raise ValueError("WALK_MAX_TRUNC_LOSS must lie in (0, 1)")
        if self.mass_tolerance < 0:
            raise ValueError("WALK_MASS_TOLERANCE must be non-negative")
        if self.green_exact_max_steps < 2:
            raise ValueError("WALK_GREEN_EXACT_MAX_STEPS must be at least 2")


@dataclass
class SimulationConfig:
    """Monte Carlo configuration"""
    n_jobs: int = field(default_factory=lambda: int(os.getenv("WALK_N_JOBS", "1")))
    chunk_size: int = field(default_factory=lambda: int(os.getenv("WALK_CHUNK_SIZE", "65536")))
    exact_moment_max_steps: int = field(
        default_factory=lambda: int(os.getenv("WALK_EXACT_MOMENT_MAX_STEPS", "20000"))
    )
    default_engine: Engine = field(default_factory=lambda: Engine(os.getenv("WALK_ENGINE", "direct")))

    def validate(self):
        """Validate simulation configuration"""
        if self.n_jobs == 0:
            raise ValueError("WALK_N_JOBS must be non-zero (use -1 for all cores)")
        if self.chunk_size < 1:
            raise ValueError("WALK_CHUNK_SIZE must be at least 1")


@dataclass
class AnalysisConfig:
    """Verification tolerances"""
    ratio_tolerance: float = field(default_factory=lambda: float(os.getenv("WALK_RATIO_TOLERANCE", "0.05")))
    sides_tolerance: float = field(default_factory=lambda: float(os.getenv("WALK_SIDES_TOLERANCE", "1e-3")))
    stabilization_tolerance: float = 0.10
    ratio_law_tolerance: float = 0.15
    bootstrap_resamples: int = field(default_factory=lambda: int(os.getenv("WALK_BOOTSTRAP_RESAMPLES", "1000")))
    bootstrap_seed: int = 20240517
    hn_rho: float = 0.2
    condition_horizon: int = field(default_factory=lambda: int(os.getenv("WALK_CONDITION_HORIZON", "10000")))

    def validate(self):
        """Validate analysis configuration"""
        for name in ("ratio_tolerance", "sides_tolerance", "stabilization_tolerance", "ratio_law_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.hn_rho < 0.25:
            raise ValueError("hn_rho must lie in (0, 1/4)")
        if self.bootstrap_resamples < 1:
            raise ValueError("bootstrap_resamples must be at least 1")


@dataclass
class OutputConfig:
    """Artifact output configuration"""
    out_dir: str = field(default_factory=lambda: os.getenv("WALK_OUT_DIR", "results"))
    report_format: str = field(default_factory=lambda: os.getenv("WALK_REPORT_FORMAT", "json"))


@dataclass
class LoggingConfig:
    """Logging Configuration"""
    level: LogLevel = field(default_factory=lambda: LogLevel(os.getenv("LOG_LEVEL", "INFO")))
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file_path: str = field(default_factory=lambda: os.getenv("LOG_FILE", "logs/walk_verify.log"))
    json_file: bool = field(default_factory=lambda: _env_bool("LOG_JSON", "true"))
    max_file_size_mb: int = 100
    backup_count: int = 10
    include_run_id: bool = True


@dataclass
class Settings:
    """Main Settings Class - Singleton pattern"""

    environment: Environment = field(default_factory=lambda: Environment(os.getenv("ENVIRONMENT", "development")))
    debug: bool = field(default_factory=lambda: _env_bool("DEBUG", "false"))

    # Sub-configurations
    exact: ExactConfig = field(default_factory=ExactConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    def __post_init__(self):
        """Validate all configurations after initialization"""
        self.validate()

    def validate(self):
        """Validate all sub-configurations"""
        self.exact.validate()
        self.simulation.validate()
        self.analysis.validate()

    def to_dict(self) -> dict:
        """Convert settings to dictionary (safe for manifests and logging)"""
        return {
            "environment": self.environment.value,
            "debug": self.debug,
            "cap_constant": self.exact.cap_constant,
            "max_trunc_loss": self.exact.max_trunc_loss,
            "n_jobs": self.simulation.n_jobs,
            "chunk_size": self.simulation.chunk_size,
            "ratio_tolerance": self.analysis.ratio_tolerance,
            "sides_tolerance": self.analysis.sides_tolerance,
            "ratio_law_tolerance": self.analysis.ratio_law_tolerance,
            "bootstrap_resamples": self.analysis.bootstrap_resamples,
        }


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create global settings instance"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reload_settings() -> Settings:
    """Force reload settings from environment"""
    global _settings
    _settings = Settings()
    return _settings
