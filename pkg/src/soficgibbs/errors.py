"""Exception hierarchy.

Every error raised by the package derives from :class:`SoficGibbsError`;
the CLI maps the three families below onto exit codes 2, 3 and 4.
"""


class SoficGibbsError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


# -- validation / parsing (exit code 2) --------------------------------------


class ValidationError(SoficGibbsError, ValueError):
    code = "validation"


class ParseError(ValidationError):
    code = "parse"


class PresentationError(ValidationError):
    code = "presentation"


class NotPrimitive(PresentationError):
    code = "not_primitive"


class NoMagicWord(PresentationError):
    code = "no_magic_word"


class InvalidPotential(ValidationError):
    code = "invalid_potential"


class WordNotAdmissible(ValidationError):
    code = "word_not_admissible"


class InsufficientContext(ValidationError):
    code = "insufficient_context"


class NonPositiveEntry(ValidationError):
    code = "non_positive_entry"


class DepthMismatch(ValidationError):
    code = "depth_mismatch"


class SupportViolation(ValidationError):
    code = "support_violation"


class GapTooSmall(ValidationError):
    code = "gap_too_small"


# -- budgets (exit code 3) ----------------------------------------------------


class BudgetExceeded(SoficGibbsError):
    code = "budget_exceeded"


class PeriodTooLarge(BudgetExceeded):
    code = "period_too_large"


# -- numerics (exit code 4) ---------------------------------------------------


class NoConvergence(SoficGibbsError, ArithmeticError):
    code = "no_convergence"
