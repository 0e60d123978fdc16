"""Exception types shared across the package."""
from __future__ import annotations


class ParameterError(ValueError):
    """Invalid argument or configuration value (bad quantile level, shape <= 0, ...)."""


class DataError(ValueError):
    """Malformed input data (CSV parse failures, schema violations)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(ArithmeticError):
    """Numerical failure (non-positive-definite precision, overflow, underflow)."""

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


class ChainError(RuntimeError):
    """A Gibbs chain aborted; carries the failing iteration (1-based sweep index)."""

    def __init__(self, message: str, iteration: int, jitter_index: int | None = None):
        detail = f"iteration {iteration}"
        if jitter_index is not None:
            detail += f", replicate {jitter_index}"
        super().__init__(f"{message} ({detail})")
        self.iteration = iteration
        self.jitter_index = jitter_index
