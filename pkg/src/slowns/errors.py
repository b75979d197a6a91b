"""Shared exception types."""

from __future__ import annotations


class DivergedError(RuntimeError):
    """Raised when a time integration produces NaN/Inf values."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message if time is None else f"{message} at t={time:.6g}")
        self.time = time


class IncommensurateGridError(ValueError):
    """Raised when a slow-variable lift cannot map grids exactly."""
