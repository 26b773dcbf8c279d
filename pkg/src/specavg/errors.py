"""Exception and warning types shared across the package."""


class SpecAvgError(Exception):
    """Base class for all package-specific errors."""


class NoConvergence(SpecAvgError):
    """An iterative solver ran out of iterations before reaching tolerance.

    Attributes carry enough context to report which eigenpair (and, in
    averaging runs, which draw) failed.
    """

    def __init__(self, message, index=None, residual=None, draw=None):
        super().__init__(message)
        self.index = index
        self.residual = residual
        self.draw = draw


class AllDrawsFailed(SpecAvgError):
    """Every subsample draw of an averaging run failed to converge."""


class DegenerateGapWarning(UserWarning):
    """The requested eigenvalue is (numerically) tied with the next one."""


class ShapeMismatch(SpecAvgError, ValueError):
    """Operands have incompatible shapes."""


class ZeroMatrix(SpecAvgError, ValueError):
    """Operation undefined for the all-zero matrix."""


class DuplicateEigenvalue(SpecAvgError, ValueError):
    """A spectral model with repeated eigenvalues was supplied where
    simple eigenvalues are required."""


class OutsidePerturbativeRegime(SpecAvgError, ValueError):
    """2*||E||/d >= 1, so the eigenvector expansion and its error budget
    are undefined."""


class InfeasibleSupports(SpecAvgError, ValueError):
    """Requested eigenvector support sizes cannot host an orthonormal
    family."""


class InvalidVn(SpecAvgError, ValueError):
    """The caller-supplied divergence-rate sequence value fails the
    finite-n admissibility checks."""


class DomainError(SpecAvgError, ValueError):
    """Numeric argument outside the domain of a closed-form bound."""


class ParseError(SpecAvgError, ValueError):
    """A text input (matrix file, edge list) is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NodeIdOverflow(SpecAvgError, ValueError):
    """An edge references a node id outside the declared node range."""


class EmptyGraph(SpecAvgError, ValueError):
    """Graph operations need at least one node."""


class LengthMismatch(SpecAvgError, ValueError):
    """Paired vectors have different lengths."""


class ZeroVariance(SpecAvgError, ValueError):
    """Correlation undefined because one input is constant."""
