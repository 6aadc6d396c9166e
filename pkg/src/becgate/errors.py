"""Exception types shared across the package."""


class BecGateError(Exception):
    """Base class for all becgate errors."""


class ValidationError(BecGateError, ValueError):
    """Bad input or violated precondition; CLI exit code 2."""


class NumericalCheckError(BecGateError, RuntimeError):
    """A runtime numerical check failed; CLI exit code 3."""


class JacobiConvergenceError(NumericalCheckError):
    """Eigensolver failed to converge within the sweep budget."""

    def __init__(self, sweeps, off_norm, tol):
        self.sweeps = sweeps
        self.off_norm = off_norm
        self.tol = tol
        super().__init__(
            f"Jacobi sweeps did not converge: off-diagonal norm {off_norm:.3e} "
            f"above tolerance {tol:.3e} after {sweeps} sweeps"
        )


class PhaseCancellationError(NumericalCheckError):
    """Stage-2 table does not cancel the quadratic spin terms of stage 1."""
