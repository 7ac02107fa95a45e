"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class BellCtxError(Exception):
    """Base class; the CLI maps these to exit status 1."""


class TableError(BellCtxError):
    """A probability table failed validation.

    ``violations`` is a list of dicts, one per violated constraint, so callers
    can report every defect at once instead of the first one found.
    """

    def __init__(self, message: str, violations: list[dict] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class MalformedTable(TableError):
    pass


class NormalisationError(TableError):
    pass


class UnknownLabel(BellCtxError):
    pass


class InvalidEquivalence(BellCtxError):
    pass


class SignallingInput(BellCtxError):
    pass


class IndexTooSmall(BellCtxError):
    pass


class NotNSForm(BellCtxError):
    pass


class NotOneHypotheticalForm(BellCtxError):
    pass


class ShapeMismatch(BellCtxError):
    pass


class BudgetExceeded(BellCtxError):
    """Enumeration would exceed the configured budget (CLI exit status 2)."""


class DimensionMismatch(BellCtxError):
    pass


class InvalidRealisation(BellCtxError):
    pass


class RankDeficientInput(BellCtxError):
    pass


class InvariantFailure(BellCtxError):
    """An internal self-check failed (CLI exit status 3)."""
