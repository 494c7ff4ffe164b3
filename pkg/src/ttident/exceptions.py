"""Exception types shared across the package."""


class TTIdentError(Exception):
    """Base class for all library-specific errors."""


class SizeCapExceeded(TTIdentError):
    """A dense materialization would exceed the configured entry cap."""


class ModeMismatch(TTIdentError):
    """Two tensor operands do not share compatible mode sizes."""


class ShapeMismatch(TTIdentError):
    """An array argument has an incompatible shape."""


class DegenerateInput(TTIdentError):
    """An operand is identically zero where a nonzero one is required."""


class StepFailure(TTIdentError):
    """Numerical integration produced a non-finite state or did not converge."""


class UnsupportedLayout(TTIdentError):
    """The dictionary layout does not match the requested construction."""


class ConfigError(TTIdentError):
    """A run configuration is invalid."""


class NotFittedError(TTIdentError):
    """An estimator method requiring a fitted model was called before fit."""


class EmptySupportWarning(UserWarning):
    """Hard thresholding removed every feature of some output component."""
