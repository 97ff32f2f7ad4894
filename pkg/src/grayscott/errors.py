"""Exception types shared across the package."""


class GrayScottError(Exception):
    """Base class for all package errors."""


class ValidationError(GrayScottError):
    """One or more configuration constraints are violated.

    Collects every violation, not just the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(GrayScottError):
    """A configuration document could not be parsed.

    Carries line/key context where available.
    """


class NegativePowerOnZeroMode(GrayScottError):
    """A negative spectral power was applied to a field with nonzero
    constant-mode content under the 'reject' zero-mode policy."""


class NonFinite(GrayScottError):
    """A field coefficient became NaN or Inf during time stepping."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class NoConvergence(GrayScottError):
    """Picard iteration did not reach the requested tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class ScheduleExhausted(GrayScottError):
    """The path norm exceeded the last cutoff level of a glueing schedule
    and no linear fallback was enabled."""
