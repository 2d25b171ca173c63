"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, CLI exit
code 2) and :class:`BudgetError` (an enumeration would exceed its budget, CLI
exit code 3).
"""


class ShiftGraphsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ShiftGraphsError, ValueError):
    pass


class BudgetError(ShiftGraphsError):
    pass


class NotIncreasing(ValidationError):
    pass


class NotProgressive(ValidationError):
    pass


class ImageCollision(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class ArityMismatch(ValidationError):
    pass


class BadArity(ValidationError):
    pass


class EmptyFamily(ValidationError):
    pass


class DegenerateThreshold(ValidationError):
    pass


class IncompatibleColoring(ValidationError):
    pass


class TieDetected(ValidationError):
    pass


class NotShiftGraph(ValidationError):
    pass


class NoCrossing(ValidationError):
    pass


class TooSmall(ValidationError):
    pass


class CycleDetected(ShiftGraphsError):
    pass


class TooLarge(BudgetError):
    pass


class ArityTooLarge(BudgetError):
    pass


class BudgetExceeded(BudgetError):
    pass
