"""Exception types shared across the package."""


class FlatnessError(ArithmeticError):
    """Base class for numerical failures of the flat maps and controllers."""


class SingularAttitudeError(FlatnessError):
    """Attitude left the (-pi/2, pi/2) pitch/roll chart (R33 <= eps)."""


class ZeroThrustError(FlatnessError):
    """Thrust vector vanished (free fall); attitude is undetermined."""


class WindowLengthError(ValueError):
    """An output window does not have the exact length an operation needs."""


class QPError(FlatnessError):
    """The equality-constrained QP could not be solved."""

    def __init__(self, status, message=""):
        super().__init__(message or status)
        self.status = status


class HistoryIncompleteError(RuntimeError):
    """Controller history is not yet full."""
