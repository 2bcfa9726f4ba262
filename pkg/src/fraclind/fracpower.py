"""Fractional powers of generators and the semigroups they generate.

Three mutually cross-checking constructions are provided for a matrix G
with spectrum in the closed right half-plane:

* ``spectral_power``      -- principal-branch eigenvalue calculus,
* ``balakrishnan_power``  -- the resolvent integral
                             (sin(pi a)/pi) int_0^inf z^(a-1) (zI+G)^{-1} G dz,
* ``subordinated_map``    -- the weighted-average semigroup
                             int_0^inf f_a(t, s) exp(-s G) ds,

plus ``kato_resolvent`` for (z I + G^a)^{-1} straight from resolvents of G.
The quadrature routes never look at eigenvectors, so each pairing with the
spectral route is a genuine two-sided check.

Evolution drivers ``evolve_observable`` / ``evolve_density`` propagate
A_t = exp(-t G^a) A_0 and rho_t = exp(-t adj(G)^a) rho_0 by a selectable
method; alpha = 1 always degenerates to the plain semigroup.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidStateError,
    QuadratureNotConvergedError,
    SingularMatrixError,
    SpectrumOutsideSectorError,
)
from .liouville import SuperOperator, unvectorize, vectorize
from .matrix_engine import (
    as_square_matrix,
    eig_decompose,
    frobenius,
    is_hermitian,
    linear_solve,
    matrix_exp,
)
from .subordinator import (
    SubordinatorSpec,
    lower_sigma_cut,
    upper_tail_mass,
    upper_sigma_cut,
    _density_sigma,
)

logger = logging.getLogger(__name__)

SPEC_TOL = 1e-9       # allowed spectral leak into the left half-plane
ZERO_TOL = 1e-12      # eigenvalues below this modulus are fixed points
BALA_TOL = 1e-5       # Balakrishnan self-refinement target
KATO_TOL = 1e-6       # Kato self-refinement target
SUBORD_TOL = 1e-4     # subordination self-refinement target


@dataclass(frozen=True)
class FractionalMethod:
    """Tagged method choice with its quadrature controls."""

    tag: str  # "spectral" | "balakrishnan" | "subordination"
    spec: SubordinatorSpec | None = None
    z_nodes: int = 200
    z_lo: float = 1e-6
    z_hi: float = 1e6

    def __post_init__(self):
        if self.tag not in ("spectral", "balakrishnan", "subordination"):
            raise ValueError(f"unknown fractional method {self.tag!r}")


@dataclass(frozen=True)
class TimeSeries:
    """Evolved operators on a strictly increasing time grid."""

    times: np.ndarray
    values: list
    alpha: float
    method: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(self.values) != t.size:
            raise ValueError("times and values must have matching lengths")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)


def _unwrap(op):
    if isinstance(op, SuperOperator):
        return op.mat, lambda m: SuperOperator(m)
    mat = as_square_matrix(op, "generator")
    return mat, lambda m: m


def _require_sector(mat: np.ndarray, spec_tol: float, values: np.ndarray | None = None) -> None:
    vals = np.linalg.eigvals(mat) if values is None else values
    worst = float(vals.real.min())
    if worst < -spec_tol:
        raise SpectrumOutsideSectorError(
            f"min Re(eigenvalue) = {worst:.3e} < -{spec_tol:.1e}; "
            "fractional power undefined under the principal branch"
        )


def _principal_power(values: np.ndarray, alpha: float, zero_tol: float) -> np.ndarray:
    powered = np.zeros_like(values)
    mask = np.abs(values) > zero_tol
    powered[mask] = values[mask] ** alpha
    return powered


def spectral_power(op, alpha: float, *, spec_tol: float = SPEC_TOL,
                   zero_tol: float = ZERO_TOL, cond_threshold: float = 1e12):
    """G^alpha by principal-branch eigenvalue calculus.

    Eigenvalues with |z| <= zero_tol map to 0 (the fixed subspace of a
    unital generator must stay fixed); alpha = 1 returns G unchanged.
    Raises SpectrumOutsideSectorError / NonDiagonalizableError so callers
    can fall back to the resolvent route.
    """
    mat, rewrap = _unwrap(op)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return rewrap(mat.copy())
    dec = eig_decompose(mat, cond_threshold=cond_threshold)
    _require_sector(mat, spec_tol, values=dec.values)
    return rewrap(dec.function_of(_principal_power(dec.values, alpha, zero_tol)))


def _resolvent_times_g(mat: np.ndarray, z: float, eye: np.ndarray) -> np.ndarray:
    # (z I + G)^{-1} G, shifting the node slightly if it hits the spectrum
    try:
        return linear_solve(z * eye + mat, mat)
    except SingularMatrixError:
        z_shift = z * (1.0 + 1e-3) + 1e-12
        logger.warning("resolvent node z=%.6e singular; shifted to %.6e", z, z_shift)
        return linear_solve(z_shift * eye + mat, mat)


def _balakrishnan_once(mat: np.ndarray, alpha: float, n: int,
                       z_lo: float, z_hi: float) -> np.ndarray:
    eye = np.eye(mat.shape[0], dtype=complex)
    u = np.linspace(math.log(z_lo), math.log(z_hi), n)
    du = u[1] - u[0]
    acc = np.zeros_like(mat)
    for i, ui in enumerate(u):
        z = math.exp(ui)
        w = du * (0.5 if i in (0, n - 1) else 1.0)
        acc += w * math.exp(alpha * ui) * _resolvent_times_g(mat, z, eye)
    # analytic tails: R(-z,G)G ~ const below z_lo, ~ G/z - G^2/z^2 above z_hi
    low_const = _resolvent_times_g(mat, z_lo, eye)
    acc += (z_lo ** alpha / alpha) * low_const
    acc += (z_hi ** (alpha - 1.0) / (1.0 - alpha)) * mat
    acc -= (z_hi ** (alpha - 2.0) / (2.0 - alpha)) * (mat @ mat)
    return (math.sin(math.pi * alpha) / math.pi) * acc


def balakrishnan_power(op, alpha: float, *, n_nodes: int = 200,
                       z_lo: float = 1e-6, z_hi: float = 1e6,
                       tol: float = BALA_TOL, max_doublings: int = 4):
    """G^alpha through the resolvent integral, refined until stable.

    Needs only linear solves, so it is the fallback of record when the
    spectral route refuses (defective or ill-conditioned eigenvectors).
    """
    mat, rewrap = _unwrap(op)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    prev = None
    n = n_nodes
    for _ in range(max_doublings + 1):
        cur = _balakrishnan_once(mat, alpha, n, z_lo, z_hi)
        if prev is not None:
            delta = frobenius(cur - prev)
            if delta <= 0.5 * tol * max(frobenius(cur), 1.0):
                return rewrap(cur)
        prev = cur
        n = 2 * n
    raise QuadratureNotConvergedError(
        f"balakrishnan power did not stabilize at {n // 2} nodes "
        f"(last delta {delta:.2e})"
    )


def _kato_once(mat: np.ndarray, alpha: float, z: float, n: int,
               x_lo: float, x_hi: float) -> np.ndarray:
    eye = np.eye(mat.shape[0], dtype=complex)
    c = math.cos(math.pi * alpha)
    s = math.sin(math.pi * alpha)

    def weight(x: float) -> float:
        xa = x ** alpha
        return xa / (z * z + 2.0 * z * xa * c + xa * xa)

    u = np.linspace(math.log(x_lo), math.log(x_hi), n)
    du = u[1] - u[0]
    acc = np.zeros_like(mat)
    for i, ui in enumerate(u):
        x = math.exp(ui)
        wq = du * (0.5 if i in (0, n - 1) else 1.0)
        try:
            res = linear_solve(x * eye + mat, eye)
        except SingularMatrixError:
            x = x * (1.0 + 1e-3)
            res = linear_solve(x * eye + mat, eye)
        acc += wq * weight(x) * x * res

    # Tails with K(x) = x (xI+G)^{-1} frozen at the cut and the scalar
    # integral of x^(alpha-1) * weight split out exactly via y = x^alpha:
    # int dy / (z^2 + 2 z c y + y^2) = atan((y + z c)/(z s)) / (z s).
    def scalar_tail(y1: float, y2: float | None) -> float:
        hi = math.pi / 2.0 if y2 is None else math.atan2(y2 + z * c, z * s)
        lo = math.atan2(y1 + z * c, z * s)
        return (hi - lo) / (alpha * z * s)

    k_lo = x_lo * linear_solve(x_lo * eye + mat, eye)
    k_hi = x_hi * linear_solve(x_hi * eye + mat, eye)
    acc += scalar_tail(0.0, x_lo ** alpha) * k_lo
    acc += scalar_tail(x_hi ** alpha, None) * k_hi
    return (s / math.pi) * acc


def kato_resolvent(op, alpha: float, z: float, *, n_nodes: int = 200,
                   x_lo: float = 1e-6, x_hi: float = 1e6,
                   tol: float = KATO_TOL, max_doublings: int = 5):
    """(z I + G^alpha)^{-1} assembled from resolvents of G alone."""
    mat, rewrap = _unwrap(op)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if z <= 0:
        raise ValueError(f"kato_resolvent requires z > 0, got {z}")
    prev = None
    n = n_nodes
    for _ in range(max_doublings + 1):
        cur = _kato_once(mat, alpha, z, n, x_lo, x_hi)
        if prev is not None:
            delta = frobenius(cur - prev)
            if delta <= 0.5 * tol * max(frobenius(cur), 1.0):
                return rewrap(cur)
        prev = cur
        n = 2 * n
    raise QuadratureNotConvergedError(
        f"kato resolvent did not stabilize at {n // 2} nodes (last delta {delta:.2e})"
    )


def _semigroup_at(mat: np.ndarray, s_values: np.ndarray) -> list[np.ndarray]:
    """exp(-s mat) at ascending s values via incremental short-step products.

    Each step exponentiates only the increment, so the scaling-and-squaring
    cost stays low however far out the grid reaches; the factors are
    contraction-like for sector generators, so the product stays stable.
    """
    out = []
    prev_s = 0.0
    acc = np.eye(mat.shape[0], dtype=complex)
    for s in s_values:
        ds = float(s) - prev_s
        if ds < 0:
            raise ValueError("nodes must be ascending")
        if ds > 0:
            acc = acc @ matrix_exp(mat, -ds)
        prev_s = float(s)
        out.append(acc)
    return out


def _settle_horizon(mat: np.ndarray, alpha: float, t: float, tol: float,
                    s_lo: float, s_hi: float):
    """Find s_cut where either exp(-sG) has settled or the density tail
    beyond s_cut cannot contribute more than tol/20."""
    scale_t = t ** (1.0 / alpha)
    target = tol / 20.0
    s_ref = max(4.0 * scale_t, 8.0 * s_lo)
    phi = matrix_exp(mat, -s_ref)
    for _ in range(64):
        phi2 = phi @ phi
        s_next = 2.0 * s_ref
        amp = max(1.0, frobenius(phi), frobenius(phi2))
        settled = frobenius(phi2 - phi) <= target * amp
        tail_ok = upper_tail_mass(alpha, s_next / scale_t) * amp <= target
        if settled or tail_ok or s_next >= s_hi:
            return s_next, phi2
        phi, s_ref = phi2, s_next
    raise QuadratureNotConvergedError(
        "semigroup neither settles nor lets the subordination tail truncate; "
        "use the spectral route for purely oscillatory spectra"
    )


def subordinated_map(op, alpha: float, t: float, *, rule=None,
                     spec: SubordinatorSpec | None = None,
                     tol: float = SUBORD_TOL, spec_tol: float = SPEC_TOL,
                     max_nodes: int = 60000):
    """The subordinated semigroup int f_alpha(t, s) exp(-s G) ds.

    With an explicit ``rule`` the weighted sum is returned as-is.  The
    adaptive path covers the density support with a log-spaced rule up to a
    settle horizon (past which exp(-sG) is constant to within tolerance),
    lumps the remaining mass there, and refines until two resolutions
    agree; the total weight is normalized to 1, so a mixture of
    trace-preserving maps stays exactly trace preserving.
    """
    mat, rewrap = _unwrap(op)
    if rule is not None:
        acc = np.zeros_like(mat)
        phis = _semigroup_at(mat, np.asarray(rule.nodes, dtype=float))
        for w, phi in zip(rule.weights, phis):
            acc += w * phi
        return rewrap(acc)

    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if t <= 0:
        raise ValueError(f"subordinated_map requires t > 0, got {t}")
    _require_sector(mat, spec_tol)

    sp = spec or SubordinatorSpec(alpha=alpha)
    scale_t = t ** (1.0 / alpha)
    s_lo = lower_sigma_cut(alpha, sp.lower_tail_mass) * scale_t
    s_hi = upper_sigma_cut(alpha, sp.tail_mass) * scale_t
    s_cut, phi_cut = _settle_horizon(mat, alpha, t, tol, s_lo, s_hi)
    s_cut = min(s_cut, s_hi)

    u_lo, u_hi = math.log(s_lo), math.log(s_cut)
    fcache: dict[float, float] = {}

    def fval(s: float) -> float:
        key = round(math.log(s), 13)
        if key not in fcache:
            fcache[key] = _density_sigma(alpha, sp.theta, s / scale_t, sp.r_max) / scale_t
        return fcache[key]

    n = max(sp.n_nodes, 33)
    prev = None
    while n <= max_nodes:
        u = np.linspace(u_lo, u_hi, n)
        du = u[1] - u[0]
        nodes = np.exp(u)
        weights = np.array([fval(float(s)) for s in nodes]) * nodes * du
        weights[0] *= 0.5
        weights[-1] *= 0.5
        acc = np.zeros_like(mat)
        mass = 0.0
        phis = _semigroup_at(mat, nodes)
        for w, phi in zip(weights, phis):
            if w == 0.0:
                continue
            acc += w * phi
            mass += w
        m_tail = max(0.0, 1.0 - mass)
        total = mass + m_tail
        cand = (acc + m_tail * phi_cut) / total
        if prev is not None and frobenius(cand - prev) <= 0.5 * tol * max(1.0, frobenius(cand)):
            return rewrap(cand)
        prev = cand
        n = 2 * n - 1
    raise QuadratureNotConvergedError(
        f"subordinated map did not stabilize below {max_nodes} nodes"
    )


def _coerce_method(method) -> FractionalMethod:
    if isinstance(method, FractionalMethod):
        return method
    return FractionalMethod(tag=str(method))


def _evolved_vectors(mat: np.ndarray, alpha: float, v0: np.ndarray,
                     times: np.ndarray, method: FractionalMethod,
                     spec_tol: float) -> list[np.ndarray]:
    if alpha == 1.0:
        return [v0.copy() if t == 0.0 else matrix_exp(mat, -t) @ v0 for t in times]

    if method.tag == "spectral":
        dec = eig_decompose(mat)
        _require_sector(mat, spec_tol, values=dec.values)
        powered = _principal_power(dec.values, alpha, ZERO_TOL)
        w0 = dec.vectors_inv @ v0
        out = []
        for t in times:
            out.append(v0.copy() if t == 0.0 else dec.vectors @ (np.exp(-t * powered) * w0))
        return out

    if method.tag == "balakrishnan":
        gpow = balakrishnan_power(mat, alpha, n_nodes=method.z_nodes,
                                  z_lo=method.z_lo, z_hi=method.z_hi)
        return [v0.copy() if t == 0.0 else matrix_exp(gpow, -t) @ v0 for t in times]

    out = []
    for t in times:
        if t == 0.0:
            out.append(v0.copy())
        else:
            mapped = subordinated_map(mat, alpha, float(t), spec=method.spec,
                                      spec_tol=spec_tol)
            out.append(mapped @ v0)
    return out


def evolve_observable(gen, alpha: float, a0, times, method="spectral", *,
                      spec_tol: float = SPEC_TOL) -> TimeSeries:
    """A_t = Phi_t^{(alpha)} A_0 on the given time grid.

    A non-self-adjoint A_0 is accepted with a warning (the evolution is
    real, so hermiticity would be preserved anyway).
    """
    mat, _ = _unwrap(gen)
    a0 = as_square_matrix(a0, "observable")
    if a0.shape[0] ** 2 != mat.shape[0]:
        raise ValueError("observable dimension does not match the generator")
    if not is_hermitian(a0, rtol=1e-8):
        warnings.warn("initial observable is not self-adjoint", stacklevel=2)
    times = np.asarray(times, dtype=float)
    if times.size and times[0] < 0:
        raise ValueError("times must start at >= 0")
    fm = _coerce_method(method)
    vecs = _evolved_vectors(mat, alpha, vectorize(a0), times, fm, spec_tol)
    return TimeSeries(times, [unvectorize(v) for v in vecs], alpha, fm.tag)


def evolve_density(adj_gen, alpha: float, rho0, times, method="spectral", *,
                   spec_tol: float = SPEC_TOL,
                   trace_tol: float = 1e-8, psd_tol: float = 1e-7) -> TimeSeries:
    """rho_t = E_t^{(alpha)} rho_0 driven by the density-side generator.

    The initial state must be self-adjoint, positive semidefinite within
    1e-10 and unit trace within 1e-12; every output is checked for unit
    trace (``trace_tol``) and positivity (``psd_tol``).
    """
    mat, _ = _unwrap(adj_gen)
    rho0 = as_square_matrix(rho0, "density operator")
    if rho0.shape[0] ** 2 != mat.shape[0]:
        raise ValueError("state dimension does not match the generator")
    if not is_hermitian(rho0, rtol=1e-10):
        raise InvalidStateError("initial state is not self-adjoint")
    if abs(np.trace(rho0) - 1.0) > 1e-12:
        raise InvalidStateError(f"initial trace {np.trace(rho0)} is not 1 within 1e-12")
    min_eig = float(np.linalg.eigvalsh((rho0 + rho0.conj().T) / 2.0)[0])
    if min_eig < -1e-10:
        raise InvalidStateError(f"initial state has eigenvalue {min_eig:.3e} < -1e-10")

    times = np.asarray(times, dtype=float)
    fm = _coerce_method(method)
    vecs = _evolved_vectors(mat, alpha, vectorize(rho0), times, fm, spec_tol)
    out = []
    for t, v in zip(times, vecs):
        rho = unvectorize(v)
        tr_defect = abs(np.trace(rho) - 1.0)
        lam = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0])
        if tr_defect > trace_tol:
            raise InvalidStateError(f"trace defect {tr_defect:.3e} at t={t}")
        if lam < -psd_tol:
            raise InvalidStateError(f"negative eigenvalue {lam:.3e} at t={t}")
        out.append(rho)
    return TimeSeries(times, out, alpha, fm.tag)


__all__ = [
    "SPEC_TOL", "ZERO_TOL", "BALA_TOL", "KATO_TOL", "SUBORD_TOL",
    "FractionalMethod",
    "TimeSeries",
    "spectral_power",
    "balakrishnan_power",
    "kato_resolvent",
    "subordinated_map",
    "evolve_observable",
    "evolve_density",
]
