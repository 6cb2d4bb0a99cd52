"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class PqfError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(PqfError):
    """Caller supplied an argument outside the documented domain."""


class PrecisionExhausted(PqfError):
    """A rigorous comparison stayed undecidable after the precision cap."""


class IterationCap(PqfError):
    """An iterative search hit its configured iteration limit."""


class AssumptionFailure(PqfError):
    """A bounded-retry search (candidate or factoring budget) was exhausted.

    The density assumptions behind the pipeline are unproven; instead of
    looping forever we fail loudly with the stage recorded in ``stage``.
    """

    def __init__(self, message: str, stage: str = ""):
        super().__init__(message)
        self.stage = stage


class NotAdjustable(PqfError):
    """Unit correction of a norm-equation solution is impossible."""


class PreconditionViolated(PqfError):
    """A geometric precondition (grid area, round exponent) does not hold."""


class InternalReductionFailure(PqfError):
    """Exact synthesis could not make progress; indicates a bug."""


class VerificationFailure(PqfError):
    """A synthesized object failed its independent re-verification."""


class DegenerateDecomposition(PqfError):
    """Euler decomposition collapsed to fewer than three axial factors."""
