"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes; see cli.EXIT_CODES.
"""


class QxpError(Exception):
    """Base class for all package errors."""


class ParameterError(QxpError):
    """A physical or numerical parameter is out of its admissible range."""


class ConfigError(QxpError):
    """An experiment configuration is malformed or incomplete.

    `field` carries the dotted path of the offending key, e.g.
    "detuning.delta_offset".
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class CapacityError(QxpError):
    """The requested system size exceeds the supported Hilbert-space budget."""


class NormalizationError(QxpError):
    """A state vector is not normalized to within the accepted tolerance."""


class NumericalError(QxpError):
    """An integrator or linear-algebra routine failed to reach its target."""


class WindowError(QxpError):
    """A trajectory analysis window does not satisfy its preconditions."""
