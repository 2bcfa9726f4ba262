"""Harmonic oscillator closed forms: classical, damped, and subordinated.

These 2x2 solutions act as analytic oracles for the generic superoperator
engine.  The free oscillator evolves (Q, P) by rotation; linear friction
turns the rotation into exp(tM) with

    M = [[mu - lam, 1/m], [-m w^2, -mu - lam]],
    lam = Im(sum_k a_k conj(b_k)),  nu^2 = mu^2 - w^2,

and the subordinated versions replace cos/sin (resp. e^{-lam t} cosh/sinh)
with their f_alpha-weighted averages C_a, S_a (resp. Ch_a, Sh_a).  Each
coefficient has a quadrature route and an analytic route obtained by
evaluating the kernel's Laplace transform at the complex decay exponents;
the two are kept separate so tests can confront them.

Note the (Q0 -> P_0-coupling) entry of the subordinated damped solution is
(1/(m nu)) Sh_a(t): averaging exp(tM) term by term leaves each matrix slot
with its own coefficient, and the top-right slot of exp(tM) carries sinh.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kv

from .errors import DegenerateNuError, SectorViolationError
from .liouville import LindbladModel
from .subordinator import (
    subordinated_exponential,
    subordinated_exponential_exact,
)

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class OscParams:
    """Free oscillator: mass, frequency, hbar (all positive)."""

    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if min(self.m, self.omega, self.hbar) <= 0:
            raise ValueError("m, omega and hbar must be positive")


@dataclass(frozen=True)
class GaussianState:
    """Gaussian pure state centred at (x0, p0) with width parameter a > 0."""

    x0: float = 0.0
    p0: float = 0.0
    a: float = 1.0

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("width parameter a must be positive")


@dataclass(frozen=True)
class OscCoeffs:
    """Subordinated rotation coefficients C_a(t), S_a(t)."""

    c: float
    s: float
    alpha: float
    t: float


@dataclass(frozen=True)
class DampedCoeffs:
    """Subordinated damped coefficients Ch_a(t), Sh_a(t) (complex in general)."""

    ch: complex
    sh: complex
    alpha: float
    t: float


@dataclass(frozen=True)
class GaussianMoments:
    mean_q: float
    mean_p: float
    disp_q: float
    disp_p: float


@dataclass(frozen=True)
class DampedOscParams:
    """Oscillator with linear friction mu and jump-operator coefficients.

    ``coeffs`` holds the (a_k, b_k) pairs of the jump operators
    V_k = a_k P + b_k Q.  The friction rate lam and the complex frequency
    parameter nu (principal square root of mu^2 - omega^2) are derived on
    access, never stored.
    """

    m: float
    omega: float
    mu: float
    coeffs: tuple[tuple[complex, complex], ...]
    hbar: float = 1.0

    def __post_init__(self):
        if min(self.m, self.omega, self.hbar) <= 0:
            raise ValueError("m, omega and hbar must be positive")
        if not self.coeffs:
            raise ValueError("need at least one (a_k, b_k) coefficient pair")
        pairs = tuple((complex(a), complex(b)) for a, b in self.coeffs)
        object.__setattr__(self, "coeffs", pairs)

    @property
    def lam(self) -> float:
        """Friction rate Im(sum a_k conj(b_k)); recomputed on every access."""
        return float(sum((a * b.conjugate()).imag for a, b in self.coeffs))

    @property
    def nu(self) -> complex:
        """Principal square root of mu^2 - omega^2 (Re >= 0, Im >= 0 when undamped)."""
        return complex(np.sqrt(complex(self.mu * self.mu - self.omega * self.omega)))

    @property
    def m_matrix(self) -> np.ndarray:
        """Drift matrix of d/dt (Q, P) = M (Q, P)."""
        return np.array(
            [[self.mu - self.lam, 1.0 / self.m],
             [-self.m * self.omega ** 2, -self.mu - self.lam]],
            dtype=complex,
        )

    def transform_matrices(self, nu_tol: float = 1e-12):
        """(N, N^{-1}, F) with M = N^{-1} F N and F = diag(-(lam+nu), -(lam-nu))."""
        nu = self.nu
        if abs(nu) <= nu_tol:
            raise DegenerateNuError(
                "nu = 0 (critical damping): use the matrix exponential directly"
            )
        mw2 = self.m * self.omega ** 2
        n_mat = np.array([[mw2, self.mu + nu], [mw2, self.mu - nu]], dtype=complex)
        n_inv = np.array(
            [[-(self.mu - nu), self.mu + nu], [mw2, -mw2]], dtype=complex
        ) / (2.0 * mw2 * nu)
        f_mat = np.diag([-(self.lam + nu), -(self.lam - nu)]).astype(complex)
        return n_mat, n_inv, f_mat


def damped_params(m: float, omega: float, mu: float, coeffs,
                  hbar: float = 1.0) -> DampedOscParams:
    """Build DampedOscParams and verify the diagonalization identities."""
    params = DampedOscParams(m=m, omega=omega, mu=mu,
                             coeffs=tuple(tuple(pair) for pair in coeffs), hbar=hbar)
    if abs(params.nu) > 1e-12:
        n_mat, n_inv, f_mat = params.transform_matrices()
        eye_res = np.linalg.norm(n_mat @ n_inv - np.eye(2))
        rec_res = np.linalg.norm(n_inv @ f_mat @ n_mat - params.m_matrix)
        if max(eye_res, rec_res) > 1e-12 * max(1.0, np.linalg.norm(params.m_matrix)):
            raise ValueError(
                f"diagonalization identities violated (residuals {eye_res:.2e}, {rec_res:.2e})"
            )
    return params


def fock_operators(n: int, params: OscParams) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum on the lowest n Fock levels.

    Q = sqrt(hbar/2 m w) (a + a+), P = i sqrt(hbar m w / 2) (a+ - a).
    The truncation pushes the commutator defect of [Q, P] = i hbar entirely
    into the (n-1, n-1) corner.
    """
    if n < 2:
        raise ValueError("need at least two Fock levels")
    lower = np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)
    raise_ = lower.conj().T
    q0 = math.sqrt(params.hbar / (2.0 * params.m * params.omega))
    p0 = math.sqrt(params.hbar * params.m * params.omega / 2.0)
    q = q0 * (lower + raise_)
    p = 1j * p0 * (raise_ - lower)
    return q, p


def oscillator_hamiltonian(n: int, params: OscParams, mu: float = 0.0) -> np.ndarray:
    """H = P^2/2m + m w^2 Q^2 / 2 (+ mu (PQ + QP)/2 with friction)."""
    q, p = fock_operators(n, params)
    h = p @ p / (2.0 * params.m) + 0.5 * params.m * params.omega ** 2 * (q @ q)
    if mu != 0.0:
        h = h + 0.5 * mu * (p @ q + q @ p)
    return h


def free_fock_model(n: int, params: OscParams) -> LindbladModel:
    """Hamiltonian-only model on n Fock levels (no jump operators)."""
    return LindbladModel(dim=n, hamiltonian=oscillator_hamiltonian(n, params),
                         lindblad_ops=(), hbar=params.hbar)


def damped_fock_model(n: int, params: DampedOscParams) -> LindbladModel:
    """Friction model on n Fock levels: V_k = a_k P + b_k Q."""
    osc = OscParams(m=params.m, omega=params.omega, hbar=params.hbar)
    q, p = fock_operators(n, osc)
    h = oscillator_hamiltonian(n, osc, mu=params.mu)
    ops = tuple(a * p + b * q for a, b in params.coeffs)
    return LindbladModel(dim=n, hamiltonian=h, lindblad_ops=ops, hbar=params.hbar)


def coherent_state(n: int, beta: complex) -> np.ndarray:
    """Truncated coherent state |beta> as a density matrix on n levels."""
    amps = np.zeros(n, dtype=complex)
    log_fact = 0.0
    for k in range(n):
        if k > 0:
            log_fact += math.log(k)
        amps[k] = beta ** k * math.exp(-abs(beta) ** 2 / 2.0 - log_fact / 2.0)
    amps /= np.linalg.norm(amps)
    return np.outer(amps, amps.conj())


def classical_solution(t: float, params: OscParams) -> np.ndarray:
    """Rotation matrix sending (Q0, P0) to (Qt, Pt); determinant 1."""
    wt = params.omega * t
    mw = params.m * params.omega
    return np.array(
        [[math.cos(wt), math.sin(wt) / mw],
         [-mw * math.sin(wt), math.cos(wt)]]
    )


def frac_osc_coeffs(alpha: float, t: float, params: OscParams,
                    rule=None, method: str = "auto") -> OscCoeffs:
    """C_a(t) = int f_a(t,s) cos(w s) ds and the sine analogue.

    ``rule`` switches to a plain weighted sum over the given subordination
    rule (useful as a third route at parameters where the rule resolves the
    oscillation); otherwise the contour quadrature in
    :func:`fraclind.subordinator.subordinated_exponential` is used, with
    ``method="closed"`` selecting the analytic value
    exp(-t (-i w)^alpha) = C + i S on the principal branch.
    """
    if alpha == 1.0:
        wt = params.omega * t
        return OscCoeffs(math.cos(wt), math.sin(wt), alpha, t)
    if rule is not None:
        c = float(np.sum(rule.weights * np.cos(params.omega * rule.nodes)))
        s = float(np.sum(rule.weights * np.sin(params.omega * rule.nodes)))
        return OscCoeffs(c, s, alpha, t)
    val = subordinated_exponential(alpha, t, -1j * params.omega, method=method)
    return OscCoeffs(val.real, val.imag, alpha, t)


def frac_osc_coeffs_exact(alpha: float, t: float, params: OscParams) -> OscCoeffs:
    """Analytic C_a, S_a: real/imaginary parts of exp(-t (-i w)^alpha)."""
    val = subordinated_exponential_exact(alpha, t, -1j * params.omega)
    return OscCoeffs(val.real, val.imag, alpha, t)


def frac_osc_solution(alpha: float, t: float, params: OscParams,
                      coeffs: OscCoeffs | None = None) -> np.ndarray:
    """[[C, S/(mw)], [-mw S, C]] acting on (Q0, P0)."""
    if coeffs is None:
        coeffs = frac_osc_coeffs(alpha, t, params)
    mw = params.m * params.omega
    return np.array(
        [[coeffs.c, coeffs.s / mw],
         [-mw * coeffs.s, coeffs.c]]
    )


def damped_phi(t: float, params: DampedOscParams, nu_tol: float = 1e-12) -> np.ndarray:
    """exp(tM) in closed form:

    e^{-lam t} [[cosh(nu t) + (mu/nu) sinh(nu t),  sinh(nu t)/(m nu)],
                [-(m w^2/nu) sinh(nu t),           cosh(nu t) - (mu/nu) sinh(nu t)]].
    """
    nu = params.nu
    if abs(nu) <= nu_tol:
        raise DegenerateNuError("nu = 0: closed form degenerate, use the matrix exponential")
    ch = cmath.cosh(nu * t)
    sh = cmath.sinh(nu * t)
    damp = cmath.exp(-params.lam * t)
    mw2 = params.m * params.omega ** 2
    mat = np.array(
        [[ch + params.mu / nu * sh, sh / (params.m * nu)],
         [-mw2 / nu * sh, ch - params.mu / nu * sh]],
        dtype=complex,
    )
    return damp * mat


def _damping_exponents(params: DampedOscParams) -> tuple[complex, complex]:
    lam, nu = params.lam, params.nu
    z_minus = lam - nu
    z_plus = lam + nu
    if min(z_minus.real, z_plus.real) < -1e-12:
        raise SectorViolationError(
            f"Re(lam -+ nu) = ({z_minus.real:.3e}, {z_plus.real:.3e}) must be >= 0"
        )
    return z_minus, z_plus


def frac_damped_coeffs(alpha: float, t: float, params: DampedOscParams,
                       method: str = "auto") -> DampedCoeffs:
    """Ch_a(t) = int f_a(t,s) e^{-lam s} cosh(nu s) ds and the sinh analogue.

    Splitting cosh/sinh into exponentials reduces both to the kernel's
    Laplace transform at lam -+ nu, evaluated by contour quadrature
    (``method`` as in :func:`frac_osc_coeffs`).
    """
    z_minus, z_plus = _damping_exponents(params)
    if alpha == 1.0:
        lm = cmath.exp(-t * z_minus)
        lp = cmath.exp(-t * z_plus)
    else:
        lm = subordinated_exponential(alpha, t, z_minus, method=method)
        lp = subordinated_exponential(alpha, t, z_plus, method=method)
    return DampedCoeffs((lm + lp) / 2.0, (lm - lp) / 2.0, alpha, t)


def frac_damped_coeffs_exact(alpha: float, t: float,
                             params: DampedOscParams) -> DampedCoeffs:
    """Analytic Ch_a, Sh_a via exp(-t (lam -+ nu)^alpha), principal branch."""
    z_minus, z_plus = _damping_exponents(params)
    lm = subordinated_exponential_exact(alpha, t, z_minus)
    lp = subordinated_exponential_exact(alpha, t, z_plus)
    return DampedCoeffs((lm + lp) / 2.0, (lm - lp) / 2.0, alpha, t)


def macdonald_damped_coeffs(t: float, params: DampedOscParams) -> DampedCoeffs:
    """alpha = 1/2 coefficients through the modified Bessel function K_{-1/2}.

    int_0^inf s^{-3/2} e^{-t^2/(4s) - c s} ds = 2 (t^2/(4c))^{-1/4} K_{-1/2}(t sqrt(c)),
    applied at c = lam -+ nu; requires Re(c) > 0 on both exponents.
    """
    z_minus, z_plus = _damping_exponents(params)
    if min(z_minus.real, z_plus.real) <= 0:
        raise SectorViolationError("Macdonald route needs strictly positive Re(lam -+ nu)")

    def bessel_integral(c: complex) -> complex:
        root = np.sqrt(complex(c))
        pref = 2.0 * (t * t / (4.0 * c)) ** -0.25
        return pref * kv(-0.5, t * root)

    lm = t / (2.0 * _SQRT_PI) * bessel_integral(z_minus)
    lp = t / (2.0 * _SQRT_PI) * bessel_integral(z_plus)
    return DampedCoeffs((lm + lp) / 2.0, (lm - lp) / 2.0, 0.5, t)


def frac_damped_solution(alpha: float, t: float, params: DampedOscParams,
                         coeffs: DampedCoeffs | None = None) -> np.ndarray:
    """[[Ch + (mu/nu) Sh, Sh/(m nu)], [-(m w^2/nu) Sh, Ch - (mu/nu) Sh]].

    alpha = 1 reproduces :func:`damped_phi`; entries are real whenever the
    parameters are physical (nu purely imaginary or real with lam >= nu).
    """
    nu = params.nu
    if abs(nu) <= 1e-12:
        raise DegenerateNuError("nu = 0: closed form degenerate")
    if coeffs is None:
        coeffs = frac_damped_coeffs(alpha, t, params)
    ch, sh = coeffs.ch, coeffs.sh
    mw2 = params.m * params.omega ** 2
    return np.array(
        [[ch + params.mu / nu * sh, sh / (params.m * nu)],
         [-mw2 / nu * sh, ch - params.mu / nu * sh]],
        dtype=complex,
    )


def gaussian_moments(alpha: float, t: float, state: GaussianState,
                     params: OscParams,
                     coeffs: OscCoeffs | None = None) -> GaussianMoments:
    """First and second moments of the evolved Gaussian state.

    <Q_t> = x0 C + p0 S/(mw),          <P_t> = p0 C - mw x0 S,
    D_t(Q) = (a^2/2) C^2 + (hbar^2 / 2 a^2 m^2 w^2) S^2,
    D_t(P) = (hbar^2 / 2 a^2) C^2 + (a^2 m^2 w^2 / 2) S^2.
    """
    if t == 0.0:
        coeffs = OscCoeffs(1.0, 0.0, alpha, 0.0)
    elif coeffs is None:
        coeffs = frac_osc_coeffs(alpha, t, params)
    c, s = coeffs.c, coeffs.s
    mw = params.m * params.omega
    a2 = state.a ** 2
    h2 = params.hbar ** 2
    return GaussianMoments(
        mean_q=state.x0 * c + state.p0 * s / mw,
        mean_p=state.p0 * c - mw * state.x0 * s,
        disp_q=0.5 * a2 * c * c + h2 / (2.0 * a2 * mw * mw) * s * s,
        disp_p=h2 / (2.0 * a2) * c * c + 0.5 * a2 * mw * mw * s * s,
    )


def qp_coefficients(a: np.ndarray, q: np.ndarray, p: np.ndarray,
                    trim: int = 1) -> tuple[complex, complex]:
    """Least-squares coefficients (x, y) with A ~ x Q + y P.

    The last ``trim`` rows/columns are dropped before fitting so Fock-space
    truncation artifacts at the edge do not pollute the fit.
    """
    sl = slice(None, -trim) if trim else slice(None)
    design = np.stack([q[sl, sl].ravel(), p[sl, sl].ravel()], axis=1)
    target = np.asarray(a, dtype=complex)[sl, sl].ravel()
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    return complex(sol[0]), complex(sol[1])


__all__ = [
    "OscParams", "GaussianState", "OscCoeffs", "DampedCoeffs",
    "GaussianMoments", "DampedOscParams",
    "damped_params", "fock_operators", "oscillator_hamiltonian",
    "free_fock_model", "damped_fock_model", "coherent_state",
    "classical_solution",
    "frac_osc_coeffs", "frac_osc_coeffs_exact", "frac_osc_solution",
    "damped_phi", "frac_damped_coeffs", "frac_damped_coeffs_exact",
    "macdonald_damped_coeffs", "frac_damped_solution",
    "gaussian_moments", "qp_coefficients",
]
