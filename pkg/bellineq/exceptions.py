class BellError(ValueError):
    """Base class for every error raised by the bellineq computations."""


class InvalidArgument(BellError):
    pass


class NoViolationError(BellError):
    """The inequality is not violated even with perfect detectors."""


class NonMonotonicError(BellError):
    """The positivity predicate flipped back while scanning efficiencies."""


class NumericalDriftError(BellError):
    """An expectation value picked up an imaginary part above tolerance."""


class RunNotFound(BellError):
    pass
