"""Exception types raised across the package."""


class ProjsqError(Exception):
    """Base class for every error raised by projsq."""


class InvalidDimension(ProjsqError, ValueError):
    pass


class InvalidArgument(ProjsqError, ValueError):
    pass


class DimensionMismatch(ProjsqError, ValueError):
    pass


class Unsupported(ProjsqError, NotImplementedError):
    pass


class TruncationOverflow(ProjsqError):
    """A state or operator does not fit into the requested Fock truncation."""


class TruncationNotConverged(ProjsqError):
    """Recomputing at a doubled truncation moved a headline value beyond tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateInput(ProjsqError, ValueError):
    pass


class CombNotConverged(ProjsqError):
    pass


class ProjectionAnnihilated(ProjsqError):
    pass


class PostselectAnnihilated(ProjsqError):
    pass


class QuadratureNotConverged(ProjsqError):
    pass


class StepControlFailure(ProjsqError):
    pass


class DenominatorDegenerate(ProjsqError):
    """The denominator mean is within 3 standard errors of zero.

    The partially filled estimator result is kept on ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
