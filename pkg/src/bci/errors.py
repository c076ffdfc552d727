"""Exception types raised across the package."""


class BCIError(ValueError):
    """Base class for all domain errors."""


class NonPositiveInput(BCIError):
    pass


class DegenerateSample(BCIError):
    """Raised when data are constant, so variance-based quantities are undefined."""


class TooFewSamples(BCIError):
    pass


class NoMaximumInRange(BCIError):
    """The likelihood maximizer sits on the search boundary.

    The boundary estimate is attached as ``estimate`` so callers can decide
    whether to clamp.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class WrongChannelCount(BCIError):
    pass


class NonPositiveGamma(BCIError):
    pass


class AllZero(BCIError):
    pass


class ShapeMismatch(BCIError):
    pass


class UnsupportedFormat(BCIError):
    pass


class CorruptFile(BCIError):
    pass
