"""Dense complex linear algebra kernels.

Everything downstream (superoperators, fractional powers, oscillator
oracles) funnels through these few operations, so the contracts are kept
strict: inputs are validated, decompositions carry their own conditioning
diagnostics, and failure modes are typed exceptions rather than silent NaNs.

Normal matrices (which include every commutator generator built from a
Hermitian Hamiltonian) are routed through a unitary Schur factorization, so
spectral calculus on them never suffers from eigenvector conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    FunctionDomainError,
    MatrixOverflowError,
    NonDiagonalizableError,
    NotHermitianError,
    SingularMatrixError,
)

#: Relative commutator norm below which a matrix is treated as normal.
NORMALITY_RTOL = 1e-12

#: Eigenvector condition number separating "spectral route ok" from fallback.
DEFAULT_COND_THRESHOLD = 1e12


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex ndarray with finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def frobenius(a) -> float:
    return float(np.linalg.norm(a))


def is_hermitian(a, rtol: float = 1e-10) -> bool:
    a = np.asarray(a)
    scale = frobenius(a)
    return frobenius(a - a.conj().T) <= rtol * max(scale, 1e-300)


@dataclass(frozen=True)
class EigDecomposition:
    """Right-eigenvector factorization A = vectors @ diag(values) @ vectors_inv."""

    values: np.ndarray
    vectors: np.ndarray
    vectors_inv: np.ndarray
    vector_cond: float
    residual: float

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def function_of(self, fvals: np.ndarray) -> np.ndarray:
        """Assemble vectors @ diag(fvals) @ vectors_inv."""
        return (self.vectors * np.asarray(fvals)) @ self.vectors_inv


def eig_decompose(a, cond_threshold: float = DEFAULT_COND_THRESHOLD) -> EigDecomposition:
    """Eigendecompose a square complex matrix.

    Normal matrices take a unitary (complex Schur) route, so degenerate
    spectra stay perfectly conditioned.  Raises NonDiagonalizableError when
    the eigenvector condition number exceeds ``cond_threshold``, signalling
    that callers should use a resolvent-based fallback.
    """
    a = as_square_matrix(a)
    scale = frobenius(a)
    if scale == 0.0:
        n = a.shape[0]
        eye = np.eye(n, dtype=complex)
        return EigDecomposition(np.zeros(n, dtype=complex), eye, eye.copy(), 1.0, 0.0)

    commutator = frobenius(a @ a.conj().T - a.conj().T @ a)
    if commutator <= NORMALITY_RTOL * scale * scale:
        t, z = scipy.linalg.schur(a, output="complex")
        values = np.diag(t).copy()
        vectors = z
        vectors_inv = z.conj().T
        cond = 1.0
    else:
        values, vectors = np.linalg.eig(a)
        cond = float(np.linalg.cond(vectors))
        if not np.isfinite(cond) or cond > cond_threshold:
            raise NonDiagonalizableError(
                f"eigenvector condition number {cond:.3e} exceeds {cond_threshold:.1e}"
            )
        vectors_inv = np.linalg.inv(vectors)

    residual = frobenius((vectors * values) @ vectors_inv - a) / scale
    return EigDecomposition(values, vectors, vectors_inv, cond, float(residual))


def matrix_exp(a, t: float = 1.0) -> np.ndarray:
    """exp(t*a) by scaling-and-squaring; exp(0*a) is the identity exactly."""
    a = as_square_matrix(a)
    if t == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    result = scipy.linalg.expm(t * a)
    if not np.all(np.isfinite(result)):
        raise MatrixOverflowError(
            f"matrix exponential overflowed at t={t!r}; reduce the time step"
        )
    return np.asarray(result, dtype=complex)


def matrix_function(a, f, cond_threshold: float = DEFAULT_COND_THRESHOLD) -> np.ndarray:
    """Spectral calculus: vectors @ diag(f(values)) @ vectors_inv.

    ``f`` must accept a complex ndarray.  Non-finite values of f at any
    eigenvalue (a branch-cut hit, say) raise FunctionDomainError so the
    caller can pick a fallback.
    """
    dec = eig_decompose(a, cond_threshold=cond_threshold)
    try:
        fvals = np.asarray(f(dec.values), dtype=complex)
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        raise FunctionDomainError(f"scalar function failed on the spectrum: {exc}") from exc
    if fvals.shape != dec.values.shape or not np.all(np.isfinite(fvals)):
        raise FunctionDomainError("scalar function returned non-finite values on the spectrum")
    return dec.function_of(fvals)


def min_hermitian_eigenvalue(a, htol: float = 1e-8) -> float:
    """Smallest eigenvalue of the Hermitian part (A + A†)/2.

    Refuses visibly non-Hermitian input: that always indicates an upstream
    construction bug, not a borderline rounding issue.
    """
    a = as_square_matrix(a)
    scale = max(frobenius(a), 1e-300)
    defect = frobenius(a - a.conj().T)
    if defect > htol * scale:
        raise NotHermitianError(
            f"hermiticity defect {defect:.3e} exceeds {htol:.1e} * |A|"
        )
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2.0)[0])


def linear_solve(a, b) -> np.ndarray:
    """Solve A X = B with a residual check.

    Raises SingularMatrixError when the factorization fails or the residual
    shows the solution cannot be trusted; for resolvent applications that
    means the shift hit the spectrum and the caller should move the node.
    """
    a = as_square_matrix(a, "lhs")
    b = np.asarray(b, dtype=complex)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"linear solve failed: {exc}") from exc
    residual = frobenius(a @ x - b)
    bound = 1e-6 * (frobenius(a) * frobenius(x) + frobenius(b)) + 1e-280
    if not np.all(np.isfinite(x)) or residual > bound:
        raise SingularMatrixError(
            f"solve residual {residual:.3e} exceeds trust bound {bound:.3e}"
        )
    return x
