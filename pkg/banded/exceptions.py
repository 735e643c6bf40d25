class SpectralRenormError(Exception):
    """Base class for all errors raised by the renormalization toolkit."""
    pass


class InvalidInputError(SpectralRenormError, ValueError):
    """Exception raised when an input violates the documented preconditions."""
    pass


class NotPositiveDefiniteError(SpectralRenormError):
    """Exception raised when a Cholesky pivot is not positive."""

    def __init__(self, row, message=None):
        self.row = row
        super().__init__(message or f"Matrix is not positive definite at row {row}.")


class SingularSystemError(SpectralRenormError):
    """Exception raised when a linear system has a zero pivot."""
    pass


class NoRealSolutionError(SpectralRenormError):
    """Exception raised when a closed-form family has no real solution for the given parameters."""
    pass


class BranchInvalidError(SpectralRenormError):
    """Exception raised when a sign branch produces no admissible Jacobi block."""

    def __init__(self, message, s=None, critical_index=None):
        self.s = s
        self.critical_index = critical_index
        location = []
        if s is not None:
            location.append(f"s={s}")
        if critical_index is not None:
            location.append(f"c={critical_index}")
        suffix = f" [{', '.join(location)}]" if location else ""
        super().__init__(f"{message}{suffix}")


class UnsupportedError(SpectralRenormError):
    """Exception raised when the input lies outside the supported scope."""
    pass


class NonConvergenceError(SpectralRenormError):
    """Exception raised when an iteration does not converge within its cap."""
    pass


class NonRealBranchError(SpectralRenormError):
    """Exception raised when an inverse branch leaves the real line."""
    pass
