"""Exception hierarchy."""


class PinchflowError(Exception):
    """Base class for all package errors."""


class DomainError(PinchflowError, ValueError):
    """An argument lies outside the domain of a formula."""


class ConeViolationError(DomainError):
    """Curvatures outside the admissible cone of the speed function."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SpeedDegeneracyError(PinchflowError):
    """The speed function vanished or turned negative somewhere on the graph."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class StiffnessError(PinchflowError):
    """The admissible time step underflowed."""


class FitError(PinchflowError, ValueError):
    """A least-squares fit was asked to work on unusable data."""


class ConsistencyError(PinchflowError):
    """Two independent evaluation routes disagree."""


class ConfigError(PinchflowError, ValueError):
    """Invalid run configuration; ``path`` names the offending JSON location."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
