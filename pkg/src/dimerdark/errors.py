"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class DimerError(Exception):
    """Base class for all errors raised by dimerdark."""


class PreconditionError(DimerError, ValueError):
    """Input does not satisfy the structural requirements of an operation."""


class DegenerateSpectrumError(DimerError):
    """Two eigenenergies coincide where the secular treatment needs a gap."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NumericalError(DimerError):
    """A numerical routine failed to converge or lost accuracy."""


class MultipleSteadyStatesError(NumericalError):
    def __init__(self, message, components=()):
        super().__init__(message)
        self.components = tuple(components)


class ConfigError(DimerError):
    """Invalid run configuration. ``key`` is the dotted path of the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key
