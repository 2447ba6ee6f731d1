"""Exception hierarchy shared by all gaplab modules."""


class GaplabError(Exception):
    """Base class for every error raised by gaplab."""


class UsageError(GaplabError, ValueError):
    """Bad arguments: wrong shapes, out-of-range parameters, grid mismatch."""


class GeometryError(UsageError):
    """Inclusion geometry violates convexity/positivity requirements."""


class SetupError(GaplabError):
    """A numerical problem could not be set up (e.g. mass matrix not SPD)."""


class NumericalError(GaplabError):
    """A solve finished but missed its accuracy target.

    Parameters
    ----------
    message : str
    residual : float, optional
        The final residual reached, kept for diagnostics.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(NumericalError):
    """Iterative solver hit its iteration cap."""


class InapplicableError(GaplabError):
    """Hypotheses of an experiment are not met (symmetry, smallness, ...)."""


class SweepAborted(NumericalError):
    """A sweep point failed; ``partial`` holds the records gathered so far."""

    def __init__(self, message, partial=None, residual=None):
        super().__init__(message, residual)
        self.partial = partial
