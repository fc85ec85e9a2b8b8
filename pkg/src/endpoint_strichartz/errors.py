"""Exception hierarchy shared by all modules."""


class StrichartzError(Exception):
    """Base class for every error raised by this package."""


class DomainError(StrichartzError, ValueError):
    """Argument outside the domain of a function (negative order, r = 0, ...)."""


class ConvergenceError(StrichartzError, RuntimeError):
    """A quadrature or series failed its own convergence check."""


class ResolutionError(StrichartzError, ValueError):
    """Radial/frequency grids cannot represent the requested transform."""


class GridMismatchError(StrichartzError, ValueError):
    """A profile does not live on the grid of the operator it is passed to."""


class AliasingError(StrichartzError, ValueError):
    """Angular modes beyond the kept range carry non-negligible energy."""


class CoverageError(StrichartzError, ValueError):
    """A dual (frequency) grid does not cover the support a multiplier needs."""


class WavefrontError(StrichartzError, ValueError):
    """Requested time window lets the dispersive front reach the grid boundary."""


class ConfigError(StrichartzError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class VersionMismatchError(StrichartzError, ValueError):
    """Run records with different format versions cannot be combined."""
