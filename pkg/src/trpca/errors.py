"""Exception hierarchy shared across the library."""


class TrpcaError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(TrpcaError):
    """Operands have incompatible dimensions."""


class SymmetryViolation(TrpcaError):
    """Fourier slices are not conjugate-symmetric; inverse transform would be complex."""


class SizeOverflow(TrpcaError):
    """Dense block-circulant materialization would exceed the configured cap."""


class IndexOutOfRange(TrpcaError):
    """Basis or slice index outside the ambient dimensions."""


class ConvergenceFailure(TrpcaError):
    """A per-slice factorization did not converge."""


class NonConvergence(TrpcaError):
    """An iterative estimate failed to settle within its iteration budget."""


class NotAProjector(TrpcaError):
    """Idempotence check failed on a tensor that should be an orthogonal projector."""


class ZeroTensor(TrpcaError):
    """Operation undefined on the zero tensor."""


class DomainError(TrpcaError):
    """Scalar argument outside its admissible range."""


class RankTooLarge(TrpcaError):
    """Requested rank exceeds min(N1, N2)."""


class InfeasiblePattern(TrpcaError):
    """Sparse support pattern cannot be realized in the given dimensions."""


class MaxItersExceeded(TrpcaError):
    """Solver hit its iteration budget before the residual target.

    Carries the partial solve in ``result`` so callers can inspect or
    continue from it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
