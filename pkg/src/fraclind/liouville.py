"""Superoperators on vectorized operator space.

Convention (fixed for the whole package): operators are vectorized by
column stacking, so entry (i, j) of an N x N operator lands at position
j*N + i, and

    vec(A X B) = (B^T kron A) vec(X).

With that convention left/right multiplication superoperators are
L_A = I kron A and R_A = A^T kron I, and the Choi matrix of a map is a
fixed reshuffle of its matrix.

Sign convention for generators: ``lindblad_generator`` returns the
dissipative generator G with spectrum in the closed right half-plane and
the observable equation of motion reads dA/dt = -G(A); the one-parameter
maps are semigroup_map(G, t) = exp(-t G).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatchError, NotHermitianError
from .matrix_engine import as_square_matrix, frobenius, is_hermitian, matrix_exp, min_hermitian_eigenvalue

#: The single vectorization convention used everywhere in this package.
VECTORIZATION = "column-stacking"


def vectorize(a) -> np.ndarray:
    """Column-stack an N x N operator into a length-N^2 vector."""
    return np.asarray(a, dtype=complex).reshape(-1, order="F")


def unvectorize(v) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    n = math.isqrt(v.size)
    if n * n != v.size:
        raise LengthMismatchError(f"vector of length {v.size} is not a stacked square matrix")
    return v.reshape((n, n), order="F")


@dataclass(frozen=True)
class SuperOperator:
    """An N^2 x N^2 matrix acting on column-stacked N x N operators."""

    mat: np.ndarray
    convention: str = field(default=VECTORIZATION, repr=False)

    def __post_init__(self):
        m = as_square_matrix(self.mat, "superoperator matrix")
        n = math.isqrt(m.shape[0])
        if n * n != m.shape[0]:
            raise ValueError(f"superoperator size {m.shape[0]} is not a perfect square")
        if self.convention != VECTORIZATION:
            raise ValueError(f"unsupported vectorization convention {self.convention!r}")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension N (the matrix is N^2 x N^2)."""
        return math.isqrt(self.mat.shape[0])

    @classmethod
    def identity(cls, dim: int) -> "SuperOperator":
        return cls(np.eye(dim * dim, dtype=complex))

    def apply(self, a) -> np.ndarray:
        """Apply the map to an operator, returning an operator."""
        return unvectorize(self.mat @ vectorize(a))

    def adjoint(self) -> "SuperOperator":
        """Hilbert-Schmidt adjoint: (adj(E)(A) | B) = (A | E(B))."""
        return SuperOperator(self.mat.conj().T)

    def compose(self, other: "SuperOperator") -> "SuperOperator":
        return SuperOperator(self.mat @ other.mat)

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        return self.compose(other)


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian H plus jump operators {V_k} on an N-dimensional space.

    H carries energy units; the V_k are dimensionless (divided by sqrt(hbar)
    where they enter the generator).
    """

    dim: int
    hamiltonian: np.ndarray
    lindblad_ops: tuple[np.ndarray, ...] = ()
    hbar: float = 1.0

    def __post_init__(self):
        h = as_square_matrix(self.hamiltonian, "hamiltonian")
        if h.shape[0] != self.dim:
            raise ValueError(f"hamiltonian has dim {h.shape[0]}, expected {self.dim}")
        if not is_hermitian(h, rtol=1e-10):
            raise NotHermitianError("hamiltonian is not self-adjoint within 1e-10")
        ops = tuple(as_square_matrix(v, "lindblad operator") for v in self.lindblad_ops)
        for v in ops:
            if v.shape[0] != self.dim:
                raise ValueError("lindblad operator dimension mismatch")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblad_ops", ops)


def multiplication_superops(a) -> tuple[SuperOperator, SuperOperator]:
    """Left and right multiplication maps: L_A(X) = A X and R_A(X) = X A."""
    a = as_square_matrix(a)
    eye = np.eye(a.shape[0], dtype=complex)
    left = SuperOperator(np.kron(eye, a))
    right = SuperOperator(np.kron(a.T, eye))
    return left, right


def commutator_generator(h, hbar: float = 1.0) -> SuperOperator:
    """The derivation A -> (1/i hbar)[H, A] as a superoperator matrix."""
    h = as_square_matrix(h, "hamiltonian")
    if not is_hermitian(h, rtol=1e-10):
        raise NotHermitianError("hamiltonian is not self-adjoint within 1e-10")
    eye = np.eye(h.shape[0], dtype=complex)
    return SuperOperator((np.kron(eye, h) - np.kron(h.T, eye)) / (1j * hbar))


def dissipator_generator(ops, hbar: float = 1.0) -> SuperOperator:
    """Dissipative part D of the generator, acting on observables.

    -D(A) = (1/2 hbar) sum_k ( V_k^dag [A, V_k] + [V_k^dag, A] V_k ),
    equivalently D(A) = -(1/hbar) sum_k ( V_k^dag A V_k - {V_k^dag V_k, A}/2 ).
    D annihilates the identity, so exp(-tG) stays unital.
    """
    ops = [as_square_matrix(v, "lindblad operator") for v in ops]
    if not ops:
        raise ValueError("need at least one operator")
    n = ops[0].shape[0]
    eye = np.eye(n, dtype=complex)
    mat = np.zeros((n * n, n * n), dtype=complex)
    for v in ops:
        vdag = v.conj().T
        vdv = vdag @ v
        sandwich = np.kron(v.T, vdag)                      # A -> V^dag A V
        anic = 0.5 * (np.kron(eye, vdv) + np.kron(vdv.T, eye))  # A -> {V^dag V, A}/2
        mat -= (sandwich - anic) / hbar
    return SuperOperator(mat)


def lindblad_generator(model: LindbladModel) -> SuperOperator:
    """Full dissipative generator G = (1/i hbar)[H, .] + dissipator.

    The equation of motion for observables is dA/dt = -G(A); the spectrum of
    G lies in the closed right half-plane and G(I) = 0.
    """
    gen = commutator_generator(model.hamiltonian, model.hbar)
    if model.lindblad_ops:
        gen = SuperOperator(gen.mat + dissipator_generator(model.lindblad_ops, model.hbar).mat)
    return gen


def adjoint_generator(sup: SuperOperator) -> SuperOperator:
    """Hilbert-Schmidt adjoint of a generator (the density-operator side)."""
    return sup.adjoint()


def density_generator(model: LindbladModel) -> SuperOperator:
    """Density-side generator assembled directly (not via the matrix adjoint).

    With G the observable generator, the density operator obeys
    drho/dt = -adj(G)(rho), and the direct form is

        adj(G)(rho) = -(1/i hbar)[H, rho]
                      - (1/hbar) sum_k ( V_k rho V_k^dag - {V_k^dag V_k, rho}/2 ).

    Kept as an independent assembly so tests can confront it with
    ``adjoint_generator(lindblad_generator(model))``.
    """
    h = model.hamiltonian
    n = model.dim
    eye = np.eye(n, dtype=complex)
    mat = -(np.kron(eye, h) - np.kron(h.T, eye)) / (1j * model.hbar)
    for v in model.lindblad_ops:
        vdag = v.conj().T
        vdv = vdag @ v
        sandwich = np.kron(v.conj(), v)                    # rho -> V rho V^dag
        anic = 0.5 * (np.kron(eye, vdv) + np.kron(vdv.T, eye))
        mat -= (sandwich - anic) / model.hbar
    return SuperOperator(mat)


def interaction_generator(model: LindbladModel, t: float) -> SuperOperator:
    """Non-Hamiltonian generator in the interaction frame at time t.

    Builds W_k(t) = U(t) V_k U(t)^dag with U(t) = exp(H t / (i hbar)) and
    returns the dissipator assembled from the W_k.  At t = 0 this is the
    dissipative part of the full generator; its spectrum is t-independent
    because the frame change is a unitary similarity.
    """
    if not model.lindblad_ops:
        raise ValueError("interaction generator needs at least one lindblad operator")
    u = matrix_exp(model.hamiltonian / (1j * model.hbar), t)
    udag = u.conj().T
    rotated = [u @ v @ udag for v in model.lindblad_ops]
    return dissipator_generator(rotated, model.hbar)


def semigroup_map(gen: SuperOperator, t: float) -> SuperOperator:
    """One-parameter map exp(-t * gen); t = 0 gives the identity exactly."""
    if t < 0:
        raise ValueError("semigroup map requires t >= 0")
    return SuperOperator(matrix_exp(gen.mat, -t))


def choi_matrix(sup: SuperOperator) -> np.ndarray:
    """Choi matrix of a map: C[(i,m),(j,n)] = <m| E(|i><j|) |n>.

    A fixed reshuffle of the superoperator matrix under column stacking;
    the map is completely positive iff C is positive semidefinite.
    """
    n = sup.dim
    return sup.mat.reshape(n, n, n, n).transpose(3, 1, 2, 0).reshape(n * n, n * n)


def _reality_residual(sup: SuperOperator) -> float:
    # E real means E(A^dag) = (E(A))^dag; in matrix form P conj(S) = S P
    # with P the index swap (i, j) -> (j, i) of the stacked labels.
    n = sup.dim
    idx = np.arange(n * n).reshape(n, n, order="F").T.reshape(-1, order="F")
    s = sup.mat
    defect = s.conj()[idx, :] - s[:, idx]
    return frobenius(defect) / max(frobenius(s), 1e-300)


@dataclass(frozen=True)
class OperationReport:
    """Verification summary for a candidate quantum operation."""

    is_real: bool
    reality_residual: float
    is_trace_preserving: bool
    trace_residual: float
    is_unital: bool
    unitality_residual: float
    choi_min_eig: float
    is_completely_positive: bool

    @property
    def is_quantum_operation(self) -> bool:
        return self.is_real and self.is_trace_preserving and self.is_completely_positive


def check_quantum_operation(
    sup: SuperOperator,
    cp_tol: float = 1e-8,
    residual_tol: float = 1e-8,
) -> OperationReport:
    """Test reality, trace preservation, unitality of the adjoint, and
    complete positivity (via the Choi matrix) of a map on density operators.

    Report-only: never raises on failed checks.
    """
    n = sup.dim
    s = sup.mat
    reality = _reality_residual(sup)

    # Trace preservation through the Choi route: partial trace over the
    # output factor must give the identity.
    choi = choi_matrix(sup)
    partial = np.trace(choi.reshape(n, n, n, n), axis1=1, axis2=3)
    trace_res = frobenius(partial - np.eye(n)) / math.sqrt(n)

    # Unitality of the adjoint map: adj(E)(I) = I.
    ident = vectorize(np.eye(n, dtype=complex))
    unital_res = float(np.linalg.norm(s.conj().T @ ident - ident)) / math.sqrt(n)

    hermitized = (choi + choi.conj().T) / 2.0
    choi_min = float(np.linalg.eigvalsh(hermitized)[0])

    return OperationReport(
        is_real=reality <= residual_tol,
        reality_residual=reality,
        is_trace_preserving=trace_res <= residual_tol,
        trace_residual=trace_res,
        is_unital=unital_res <= residual_tol,
        unitality_residual=unital_res,
        choi_min_eig=choi_min,
        is_completely_positive=choi_min >= -cp_tol,
    )


def kraus_apply(kraus, rho) -> tuple[np.ndarray, float]:
    """Apply sum_k A_k rho A_k^dag; also return |sum A_k^dag A_k - I|_F.

    The residual flags how far the Kraus set is from trace preserving.
    """
    ops = [as_square_matrix(k, "kraus operator") for k in kraus]
    rho = as_square_matrix(rho, "state")
    n = rho.shape[0]
    out = np.zeros_like(rho)
    complete = np.zeros_like(rho)
    for k in ops:
        out += k @ rho @ k.conj().T
        complete += k.conj().T @ k
    return out, frobenius(complete - np.eye(n))


def kraus_superop(kraus) -> SuperOperator:
    """Superoperator matrix of rho -> sum_k A_k rho A_k^dag."""
    ops = [as_square_matrix(k, "kraus operator") for k in kraus]
    n = ops[0].shape[0]
    mat = np.zeros((n * n, n * n), dtype=complex)
    for k in ops:
        mat += np.kron(k.conj(), k)
    return SuperOperator(mat)


__all__ = [
    "VECTORIZATION",
    "SuperOperator",
    "LindbladModel",
    "OperationReport",
    "vectorize",
    "unvectorize",
    "multiplication_superops",
    "commutator_generator",
    "dissipator_generator",
    "lindblad_generator",
    "adjoint_generator",
    "density_generator",
    "interaction_generator",
    "semigroup_map",
    "choi_matrix",
    "check_quantum_operation",
    "kraus_apply",
    "kraus_superop",
]
