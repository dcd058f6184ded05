"""Exception types shared across the package.

Every failure mode callers are expected to handle maps to one of these, so
the CLI and the HTTP service can translate them to exit codes / status
codes without string matching.
"""


class LatentCloudError(Exception):
    """Base class for all package errors."""


class DimensionError(LatentCloudError, ValueError):
    """Shapes or sizes of inputs are inconsistent with the operation."""


class ConfigError(LatentCloudError, ValueError):
    """A configuration value is out of its documented range."""


class CapacityError(LatentCloudError, ValueError):
    """Input exceeds a documented size cap for this operation."""


class ConvergenceError(LatentCloudError, RuntimeError):
    """An iterative solver hit its iteration cap before converging."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class DivergenceError(LatentCloudError, RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class FormatError(LatentCloudError, ValueError):
    """A file does not conform to its documented format.

    ``line`` (text formats) or ``offset`` (binary formats) locates the
    problem when known.
    """

    def __init__(self, message, line=None, offset=None):
        super().__init__(message)
        self.line = line
        self.offset = offset
