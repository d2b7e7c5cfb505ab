"""
Error taxonomy, categorisation and retry logic for the verification engine
Includes exit-code mapping and level-cap escalation for truncated sweeps
"""

import json
from functools import wraps
from typing import Any, Callable, List, Tuple
from datetime import datetime
from enum import Enum

from pydantic import ValidationError

from core_engine.logging_config import get_logger

logger = get_logger(__name__)


class ErrorCategory(str, Enum):
    """Error categorization"""
    VALIDATION = "validation"
    PRECONDITION = "precondition"
    TRUNCATION = "truncation"
    STATISTICAL = "statistical"
    IO = "io"
    UNKNOWN = "unknown"


class WalkError(Exception):
    """Base class for every engine error"""
    category: ErrorCategory = ErrorCategory.UNKNOWN


class InvalidProfile(WalkError):
    """Step profile violates 0 < p_j <= 1/2 or omega <= inf p_j"""
    category = ErrorCategory.VALIDATION


class InvalidGrid(WalkError):
    """Scale grid is empty, unsorted or contains values below the minimum"""
    category = ErrorCategory.VALIDATION


class AsymmetricTails(WalkError):
    """Table profile tails differ, so the two-sided averaging limit does not exist"""
    category = ErrorCategory.PRECONDITION


class GammaNotAboveOne(WalkError):
    """Operation needs gamma > 1"""
    category = ErrorCategory.PRECONDITION


class GammaNotAboveOneWarning(UserWarning):
    """gamma <= 1: the walk degenerates and the return-probability law does not apply"""


class SidesDisagree(WalkError):
    """Upward and downward averages of 1/p_j do not share a limit"""
    category = ErrorCategory.PRECONDITION

    def __init__(self, message: str, plus: float, minus: float):
        super().__init__(message)
        self.plus = plus
        self.minus = minus


class TooLarge(WalkError):
    """Enumeration oracle asked for more steps than it can enumerate"""
    category = ErrorCategory.PRECONDITION


class InsufficientVisits(WalkError):
    """A local-time ratio was requested for a site that was never visited"""
    category = ErrorCategory.STATISTICAL


class CapTooSmall(WalkError):
    """Truncated sweep dropped more mass than the configured ceiling"""
    category = ErrorCategory.TRUNCATION

    def __init__(self, trunc_loss: float, level_cap: int, n: int, limit: float):
        self.trunc_loss = trunc_loss
        self.level_cap = level_cap
        self.n = n
        self.limit = limit
        super().__init__(
            f"truncation loss {trunc_loss:.3e} exceeds {limit:.1e} after {n} steps "
            f"with level cap {level_cap}; {self.hint}"
        )

    @property
    def hint(self) -> str:
        return f"rerun with --level-cap {2 * self.level_cap} or --retry-cap 1"


class ErrorHandler:
    """Centralized error handling"""

    @staticmethod
    def categorize_error(exception: Exception) -> ErrorCategory:
        """Categorize an exception"""
        if isinstance(exception, WalkError):
            return exception.category
        if isinstance(exception, (ValidationError, json.JSONDecodeError, ValueError)):
            return ErrorCategory.VALIDATION
        if isinstance(exception, OSError):
            return ErrorCategory.IO
        return ErrorCategory.UNKNOWN

    @staticmethod
    def exit_code(exception: Exception) -> int:
        """Usage errors (bad input, missing files) exit 2; everything else exits 1"""
        category = ErrorHandler.categorize_error(exception)
        if category in (ErrorCategory.VALIDATION, ErrorCategory.IO):
            return 2
        return 1


class ErrorContext:
    """Collects failures of one multi-claim operation"""

    def __init__(self, operation_name: str):
        self.operation_name = operation_name
        self.errors: List[Tuple[datetime, str, Exception]] = []
        self.start_time = datetime.now()

    def add_error(self, label: str, exception: Exception):
        """Record an error against a claim label"""
        self.errors.append((datetime.now(), label, exception))

    def get_error_summary(self) -> str:
        """Get summary of errors"""
        if not self.errors:
            return "No errors"

        duration = datetime.now() - self.start_time
        summary = f"Operation '{self.operation_name}' recorded {len(self.errors)} error(s) in {duration.total_seconds():.2f}s\n"
        for i, (_, label, error) in enumerate(self.errors, 1):
            category = ErrorHandler.categorize_error(error)
            summary += f"{i}. {label}: [{category.value}] {error}\n"
        return summary


def retry_with_larger_cap(max_retries: int = 1, growth: int = 2):
    """
    Decorator rerunning an exact computation with a wider level cap on CapTooSmall

    The wrapped callable must accept a ``level_cap`` keyword. An AUTO cap is
    replaced by the cap reported in the exception before it is grown.
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            for attempt in range(max_retries + 1):
                try:
                    return func(*args, **kwargs)
                except CapTooSmall as e:
                    if attempt >= max_retries:
                        logger.error(f"{func.__name__}: cap escalation exhausted after {attempt + 1} attempt(s)")
                        raise
                    kwargs["level_cap"] = e.level_cap * growth
                    logger.warning(
                        f"Retry {attempt + 1}/{max_retries} for {func.__name__} "
                        f"with level cap {kwargs['level_cap']} (loss {e.trunc_loss:.3e})"
                    )
            raise AssertionError("unreachable")

        return wrapper
    return decorator

