"""Exception hierarchy shared by every gridnav module."""


class GridNavError(Exception):
    """Base class for all errors raised by gridnav."""


class ConfigurationError(GridNavError, ValueError):
    """A parameter or dimension is outside its valid range."""


class InputSaturationError(GridNavError, ValueError):
    """A per-step network displacement is too large to be tracked unambiguously."""

    def __init__(self, message, t=None, index=None):
        super().__init__(message)
        self.t = t
        self.index = index


class DegenerateActivityError(GridNavError, RuntimeError):
    """The network's total activity collapsed to (numerically) zero."""


class NoBumpError(GridNavError, RuntimeError):
    """Activity is too diffuse for a bump position to be decoded."""


class CalibrationError(GridNavError, RuntimeError):
    """The grid-spacing calibration run produced no usable displacement."""


class TrajectoryFormatError(GridNavError, ValueError):
    """A trajectory or estimate file is malformed."""
