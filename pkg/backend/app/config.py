"""
Configuration management for orbispec.
Loads environment variables and provides configuration settings.
"""
import os
from pathlib import Path
from typing import List, Optional
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


_LOG_LEVELS = {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}


class Settings:
    """Application settings loaded from environment variables."""

    # Application
    APP_ENV: str = os.getenv("APP_ENV", "development")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # API Configuration
    API_HOST: str = os.getenv("API_HOST", "0.0.0.0")
    API_PORT: int = int(os.getenv("API_PORT", "8000"))

    # Computation guardrails
    ENUMERATION_CAP: int = int(os.getenv("ENUMERATION_CAP", "10000000"))
    ORDER_CAP: int = int(os.getenv("ORDER_CAP", "1024"))
    THREADS: int = int(os.getenv("THREADS", str(os.cpu_count() or 1)))

    # Floating-point gates
    INTEGRALITY_TOLERANCE: float = float(os.getenv("INTEGRALITY_TOLERANCE", "1e-6"))
    IMAGINARY_TOLERANCE: float = float(os.getenv("IMAGINARY_TOLERANCE", "1e-9"))
    TAIL_RELATIVE_TOLERANCE: float = float(os.getenv("TAIL_RELATIVE_TOLERANCE", "1e-12"))

    DEFAULT_T_GRID_RAW: str = os.getenv("DEFAULT_T_GRID", "0.1,0.05,0.02")

    @property
    def log_dir(self) -> Optional[Path]:
        """Directory for rotating log files, or None for stderr-only logging."""
        env_dir = os.getenv("LOG_DIR")
        return Path(env_dir) if env_dir else None

    @property
    def default_t_grid(self) -> List[float]:
        """Time grid used by trace-check when none is given."""
        return [float(t) for t in self.DEFAULT_T_GRID_RAW.split(",") if t.strip()]

    def validate(self) -> bool:
        """Validate that settings are usable."""
        from app.core.exceptions import ConfigurationError

        problems = []
        if self.ENUMERATION_CAP <= 0:
            problems.append("ENUMERATION_CAP must be positive")
        if self.ORDER_CAP <= 0:
            problems.append("ORDER_CAP must be positive")
        if self.THREADS <= 0:
            problems.append("THREADS must be positive")
        for name in ("INTEGRALITY_TOLERANCE", "IMAGINARY_TOLERANCE", "TAIL_RELATIVE_TOLERANCE"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be positive")
        if self.LOG_LEVEL.upper() not in _LOG_LEVELS:
            problems.append(f"LOG_LEVEL '{self.LOG_LEVEL}' is not a loguru level")
        if not self.default_t_grid or any(t <= 0 for t in self.default_t_grid):
            problems.append("DEFAULT_T_GRID must list positive times")

        if problems:
            raise ConfigurationError("; ".join(problems))

        return True


# Global settings instance
settings = Settings()
