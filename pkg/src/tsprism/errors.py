"""Exception hierarchy.

Every error raised by this library derives from :class:`TsprismError`, so
callers can catch one type at the boundary and still branch on the precise
failure when they need to.
"""

from __future__ import annotations


class TsprismError(Exception):
    """Base class for all library errors."""


# --- ingestion ---------------------------------------------------------------


class MalformedRow(TsprismError):
    """A CSV row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NonUniformStep(TsprismError):
    """Timestamps do not advance by a constant step; names the first offender."""


class EmptyInput(TsprismError):
    """No usable data rows / explanations were supplied."""


# --- windowing and scaling ----------------------------------------------------


class DegenerateSplit(TsprismError):
    """A train/test split would leave one side empty."""


class WindowTooLong(TsprismError):
    """Requested window length exceeds the series length."""


class ZeroVariance(TsprismError):
    """Cannot fit a scaler on constant data (std would be 0)."""


# --- decomposition ------------------------------------------------------------


class SingularSystem(TsprismError):
    """The penalized normal equations stayed singular after one jitter retry."""


class WindowTooShort(TsprismError):
    """Window has too few samples for the requested seasonal orders."""


# --- attribution --------------------------------------------------------------


class TooManyConcepts(TsprismError):
    """Exact enumeration is capped at 20 concepts (2^m coalitions)."""


class LengthMismatch(TsprismError):
    """Background windows and the explained input differ in length."""


class InsufficientTrainingData(TsprismError):
    """Fewer training windows than requested background samples."""


# --- models -------------------------------------------------------------------


class PeriodTooLong(TsprismError):
    """Seasonal-naive period does not fit inside the input window."""


class ModelFailure(TsprismError):
    """A model produced non-finite or structurally invalid predictions."""


class SpawnFailure(TsprismError):
    """An external model process could not be started."""


class ProtocolViolation(TsprismError):
    """An external model broke the wire protocol; carries the offending line."""

    def __init__(self, message: str, line: str | None = None):
        if line is not None:
            message = f"{message} (offending line: {line!r})"
        super().__init__(message)
        self.line = line


class ModelTimeout(TsprismError):
    """An external model did not answer a batch within the configured timeout."""
