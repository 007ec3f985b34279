"""Exception types shared across the package."""


class HarmonicLinesError(ValueError):
    """Base class for all validation errors raised by this package."""


class ParameterError(HarmonicLinesError):
    """A dial or configuration value is outside its legal range."""


class FrameError(HarmonicLinesError):
    """A control frame contains non-finite or otherwise unusable data."""


class InputError(HarmonicLinesError):
    """Structurally invalid input (empty, mismatched lengths, bad file)."""


class DomainError(HarmonicLinesError):
    """A value is outside the validity range of an underlying model."""
