"""Exception types shared across topobound."""

from __future__ import annotations


class TopoboundError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(TopoboundError, ValueError):
    """An operation was called outside its precondition (sizes, empty regions, ...)."""


class ValidationError(TopoboundError, ValueError):
    """A code document or circuit failed validation."""


class ResourceBudgetError(TopoboundError, RuntimeError):
    """A computation would exceed its exhaustive or dense-memory budget."""


class DistanceInfeasible(ResourceBudgetError):
    """Exact distance search refused because it exceeds the enumeration budget."""


class CleaningObstruction(TopoboundError, RuntimeError):
    """No stabilizer element matches the logical operator on the region to clean.

    ``inconsistent`` is set when the region had been certified correctable,
    which would contradict the cleaning lemma and therefore signals a bug.
    """

    def __init__(self, message: str, inconsistent: bool = False):
        super().__init__(message)
        self.inconsistent = inconsistent


class SetupError(TopoboundError, RuntimeError):
    """The requested experiment cannot be set up on this instance (code too small, ...)."""


class UnsupportedGate(TopoboundError, ValueError):
    """A circuit contains a gate tag outside the supported Clifford set."""
