"""
Logging service for orbispec.

Console output goes to stderr so stdout stays machine-readable for the CLI.
Rotating file sinks are added when LOG_DIR is configured.
"""
import sys
from typing import Optional
from loguru import logger

from app.config import settings


LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
    "<level>{message}</level>"
)


def setup_logger(level: Optional[str] = None):
    """
    Configure and setup application logger.

    Sets up:
    - Console logging to stderr with colored output
    - File logging to LOG_DIR when set, with rotation and retention

    Args:
        level: Overrides settings.LOG_LEVEL (the CLI --log-level flag)
    """
    level = (level or settings.LOG_LEVEL).upper()

    # Remove default logger
    logger.remove()

    logger.add(
        sys.stderr,
        format=LOG_FORMAT,
        level=level,
        colorize=sys.stderr.isatty(),
        backtrace=True,
        diagnose=settings.APP_ENV == "development"
    )

    log_dir = settings.log_dir
    if log_dir is not None:
        log_dir.mkdir(parents=True, exist_ok=True)

        logger.add(
            log_dir / "orbispec.log",
            format=LOG_FORMAT,
            level=level,
            rotation="10 MB",
            retention="7 days",
            compression="zip",
            backtrace=True,
            enqueue=True  # worker threads log too
        )

        logger.add(
            log_dir / "orbispec_errors.log",
            format=LOG_FORMAT,
            level="ERROR",
            rotation="10 MB",
            retention="30 days",
            compression="zip",
            backtrace=True,
            enqueue=True
        )

    return logger


# Initialize logger
app_logger = setup_logger()

# Export logger for easy import
__all__ = ["app_logger", "setup_logger"]
