"""Exception hierarchy shared by all grassgeo modules."""


class GrassgeoError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(GrassgeoError, ValueError):
    """An input violates a precondition (shape, adjointness, tangency, ...)."""


class ShapeMismatchError(ValidationError):
    pass


class BranchCutError(ValidationError):
    """logm_unitary was asked for a logarithm with an eigenvalue at -1."""


class CrossCheckError(GrassgeoError, RuntimeError):
    """Two independent evaluation routes disagreed beyond tolerance.

    This always signals a bug (or a tolerance too tight for the input), never
    bad user data.
    """
