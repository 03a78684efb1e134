"""Exception hierarchy shared by every gapspec module."""


class GapspecError(Exception):
    """Base class for all library errors."""


class AssemblyError(GapspecError):
    """Operator model produced entries that violate the pencil invariants."""


class DegenerateBasisError(GapspecError):
    """The Gram matrix of the basis is not (numerically) positive definite."""


class SolverError(GapspecError):
    """Dense eigensolver failed to converge."""


class CertificationError(GapspecError):
    """Computed roots failed the post hoc residual certification."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class ConvergenceError(GapspecError):
    """Numerical quadrature did not reach the requested tolerance."""
