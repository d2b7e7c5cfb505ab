"""
Structured logging configuration for the anisotropic walk verification engine
Provides rotating JSON file handlers, colored console output, and run-id stamping
"""

import logging
import logging.handlers
import os
from typing import Optional

from pythonjsonlogger import jsonlogger

from config import get_settings


class ContextFilter(logging.Filter):
    """Add contextual information like the CLI run id to log records"""

    def __init__(self, run_id: Optional[str] = None):
        super().__init__()
        self.run_id = run_id or "NO_RUN"

    def filter(self, record):
        record.run_id = self.run_id
        return True


class ColoredFormatter(logging.Formatter):
    """Colored log formatter for console output"""

    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[41m',   # Red background
    }
    RESET = '\033[0m'

    def format(self, record):
        levelname = record.levelname
        if levelname in self.COLORS:
            record = logging.makeLogRecord(record.__dict__)
            record.levelname = f"{self.COLORS[levelname]}{levelname}{self.RESET}"
        return super().format(record)


# One filter shared by every configured logger so a run id set by the CLI
# reaches library modules that were configured at import time.
_context_filter = ContextFilter()


def set_run_id(run_id: Optional[str]) -> None:
    """Stamp subsequent records from every configured logger with run_id"""
    _context_filter.run_id = run_id or "NO_RUN"


def setup_logging(name: Optional[str] = None, run_id: Optional[str] = None) -> logging.Logger:
    """
    Configure logging with a rotating file handler and console output

    Args:
        name: Logger name (usually __name__)
        run_id: Optional run id for tracing one CLI invocation

    Returns:
        Configured logger instance
    """
    settings = get_settings()
    logger = logging.getLogger(name or "walk_verify")
    logger.setLevel(settings.logging.level.value)

    if run_id is not None:
        set_run_id(run_id)

    # Remove existing handlers to prevent duplicates
    logger.handlers.clear()

    if settings.logging.include_run_id:
        text_format = "%(asctime)s - %(name)s - [%(run_id)s] - %(levelname)s - %(message)s"
    else:
        text_format = settings.logging.format

    console_handler = logging.StreamHandler()
    console_handler.setLevel(settings.logging.level.value)
    console_handler.setFormatter(ColoredFormatter(text_format, datefmt="%H:%M:%S"))
    console_handler.addFilter(_context_filter)
    logger.addHandler(console_handler)

    file_path = settings.logging.file_path
    if file_path:
        log_dir = os.path.dirname(file_path)
        try:
            if log_dir:
                os.makedirs(log_dir, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                file_path,
                maxBytes=settings.logging.max_file_size_mb * 1024 * 1024,
                backupCount=settings.logging.backup_count,
            )
            if settings.logging.json_file:
                file_formatter = jsonlogger.JsonFormatter(
                    "%(asctime)s %(name)s %(run_id)s %(levelname)s %(message)s"
                )
            else:
                file_formatter = logging.Formatter(text_format, datefmt="%Y-%m-%d %H:%M:%S")
            file_handler.setLevel(settings.logging.level.value)
            file_handler.setFormatter(file_formatter)
            file_handler.addFilter(_context_filter)
            logger.addHandler(file_handler)
        except OSError as e:
            logger.warning(f"Failed to setup file logging at {file_path}: {e}")

    return logger


def get_logger(name: Optional[str] = None, run_id: Optional[str] = None) -> logging.Logger:
    """Get a configured logger instance"""
    return setup_logging(name, run_id)
