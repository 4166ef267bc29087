class PhcError(Exception):
    """Base class for errors raised by phcorder."""


class MeasureError(PhcError, ValueError):
    """Malformed measure, kernel or function data, or an illegal argument."""


class AlignmentError(MeasureError):
    """Kernel source/target atoms do not line up with the given measure or kernel."""


class NumericalBreakdown(PhcError, ArithmeticError):
    """A computed witness failed residual verification."""


class UnboundedError(PhcError):
    """The linear program has no finite optimum."""

    def __init__(self, message: str, ray=None):
        super().__init__(message)
        self.ray = ray


class InfeasibleError(PhcError):
    """The linear program has no feasible point."""

    def __init__(self, message: str, farkas=None):
        super().__init__(message)
        self.farkas = farkas
