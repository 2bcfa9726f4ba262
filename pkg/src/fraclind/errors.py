"""Exception hierarchy.

Two families matter for the CLI exit-code contract: configuration/input
problems (exit 2) and numerical failures (exit 3).  Verification failures
are reported, not raised.
"""


class FraclindError(Exception):
    """Base class for all package errors."""


class ConfigError(FraclindError):
    """Invalid or malformed scenario configuration (CLI exit code 2)."""


class GridMismatchError(FraclindError):
    """Series files do not share a time grid (CLI exit code 2)."""


class NumericalError(FraclindError):
    """Base class for numerical failures (CLI exit code 3)."""


class NonDiagonalizableError(NumericalError):
    """Eigenvector matrix too ill-conditioned to trust a spectral route."""


class MatrixOverflowError(NumericalError):
    """Matrix exponential overflowed; the time step is too large for the spectrum."""


class FunctionDomainError(NumericalError):
    """A scalar function was undefined (or non-finite) at an eigenvalue."""


class NotHermitianError(NumericalError):
    """An operator required to be self-adjoint is not."""


class SingularMatrixError(NumericalError):
    """Linear solve hit a (numerically) singular matrix."""


class LengthMismatchError(NumericalError):
    """Vector length is not a perfect square, so it cannot be unvectorized."""


class QuadratureNotConvergedError(NumericalError):
    """Successive quadrature refinements failed to settle within tolerance."""


class DomainError(NumericalError):
    """Argument outside the mathematical domain (e.g. t <= 0 for the density)."""


class SpectrumOutsideSectorError(NumericalError):
    """Generator spectrum leaves the closed right half-plane; fractional power undefined."""


class DegenerateNuError(NumericalError):
    """Critically damped oscillator (nu = 0): the diagonalizing matrix is singular."""


class SectorViolationError(NumericalError):
    """Damping exponents have negative real part; subordination integrals diverge."""


class InvalidStateError(NumericalError):
    """Density operator violates positivity / unit-trace requirements."""
