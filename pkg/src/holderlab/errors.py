"""Exception hierarchy shared by the library and the command line runner."""


class HolderLabError(Exception):
    """Base class for all library errors."""


class ConfigurationError(HolderLabError, ValueError):
    """Invalid parameters, mismatched spaces or a malformed config file.

    Parameters
    ----------
    message : str
        Human readable explanation.
    key : str, optional
        Name of the offending config key or argument, if any.
    """

    def __init__(self, message, key=None):
        self.key = key
        if key is not None and key not in message:
            message = f"{key}: {message}"
        super().__init__(message)


class DomainError(HolderLabError, ValueError):
    """A point or length lies outside the admissible range."""


class NumericalError(HolderLabError, ArithmeticError):
    """A numerical routine failed to reach its target accuracy.

    Parameters
    ----------
    message : str
        Explanation.
    achieved : float, optional
        Best error estimate that was reached before giving up.
    """

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        if achieved is not None:
            message = f"{message} (achieved {achieved:.3e})"
        super().__init__(message)


class ResourceError(HolderLabError, MemoryError):
    """The requested computation exceeds a configured size cap."""


class UnsupportedOperationError(HolderLabError, NotImplementedError):
    """The operation is not defined for the given space."""
