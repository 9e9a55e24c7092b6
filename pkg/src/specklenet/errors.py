"""Exception types shared across the package."""


class SpecklenetError(Exception):
    """Base class for package errors."""


class InvalidInputError(SpecklenetError, ValueError):
    """An argument violates an operation's preconditions."""


class DegenerateInputError(SpecklenetError, ValueError):
    """Input is technically valid but degenerate (e.g. zero variance)."""


class ConfigurationError(SpecklenetError, ValueError):
    """Inconsistent configuration (overlapping seed pools, bad schedule, ...)."""


class ShapeError(SpecklenetError, ValueError):
    """Array shapes are incompatible; the message names both shapes."""


class FormatError(SpecklenetError, ValueError):
    """A file does not conform to its declared format; names the file."""


class CheckpointError(SpecklenetError, RuntimeError):
    """A checkpoint cannot be loaded (corrupt, wrong version, wrong arch)."""
