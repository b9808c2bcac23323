"""Exception hierarchy for gentleq."""


class GentleqError(ValueError):
    """Base class for all library errors."""


class NotHermitian(GentleqError):
    pass


class NoConvergence(GentleqError, ArithmeticError):
    pass


class DimensionMismatch(GentleqError):
    pass


class OutsideBall(GentleqError):
    pass


class WrongDimension(GentleqError):
    pass


class InvalidState(GentleqError):
    pass


class InvalidMeasurement(GentleqError):
    pass


class ZeroProbabilityOutcome(GentleqError):
    pass


class UnknownLabel(GentleqError, KeyError):
    pass


class NotAProjector(GentleqError):
    pass


class InvalidAlpha(GentleqError):
    pass


class AlphaOutOfRange(GentleqError):
    pass


class SupportMismatch(GentleqError):
    pass


class TooFewCopies(GentleqError):
    pass


class InvalidInput(GentleqError):
    pass


class ConfigInvalid(GentleqError):
    """Raised with a mapping of field name to message."""

    def __init__(self, errors):
        self.errors = dict(errors)
        msg = "; ".join(f"{k}: {v}" for k, v in self.errors.items())
        super().__init__(msg)
