"""
Green function, quasi-zero eigenvalues, zero-mode measure and the
assembled instanton-gas decay rate.

On a finite horizon [-T, T] with Dirichlet ends the two zero modes of the
fluctuation operator are lifted to small positive eigenvalues lambda_phi
(rotation) and lambda_tau (time translation), both of order
Omega**2 exp(-2 Omega T).  They are found here by first-order boundary
perturbation: write the eigenfunction as a zero mode plus a combination
of the other kernel solutions plus lambda times the Green-function
integral of the zero mode, and demand that it vanish at both ends.  That
is a 4x4 linear system for three coefficients and lambda.

The decay rate then follows from

    |K| = 1/2 * sqrt(J0 lambda_phi lambda_tau / |J|) * J_phitau / (2 pi)
    Gamma = 4 pi |K| exp(-S_cl)

where the negative eigenvalue has already cancelled between det' A and
the Gelfand-Yaglom ratio, so it is never computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import _taylor
from .errors import IllConditionedError, QuadratureError, RegimeError
from .jacobi import (
    _euclidean_frequency,
    basis_values,
    determinant_J,
    determinant_J0,
    snap_horizon,
)
from .model import ModelParams, bounce, bounce_velocity, classical_action

__all__ = [
    "GreenFunctionTable",
    "ModeNorms",
    "RateBreakdown",
    "green_function",
    "extract_zero_eigenvalues",
    "zero_eigenvalues_by_shooting",
    "mode_norms",
    "zero_mode_jacobian",
    "faddeev_popov_determinant",
    "hyperbolic_integrals",
    "assemble_rate",
]

MAX_CONDITION = 1e12
TRUNCATE = 40.0  # quadrature cut-off in units of 1/Omega

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _line_quadrature(f, L, width):
    """Composite 20-point Gauss-Legendre rule for a vectorized f on [-L, L].

    The integrands here are built from sech(Omega tau), whose nearest
    poles sit pi/(2 Omega) off the real axis; panels of width 1/(2 Omega)
    put those poles far outside the convergence ellipse of each panel.
    """
    n = max(1, int(math.ceil(2 * L / width)))
    edges = np.linspace(-L, L, n + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_NODES).ravel()
    w = (half[:, None] * _GL_WEIGHTS).ravel()
    return np.sum(f(x) * w, axis=-1)


def _coefficients(params, tau_prime):
    """Basis coefficients of the Green-function columns sourced at tau'.

    Returns shape (4, 2, n): coefficient of phi_i in column k.
    """
    v = basis_values(params, tau_prime)
    return np.stack(
        [
            np.stack([-v[2, 0], -v[3, 0], v[0, 0], v[1, 0]]),
            np.stack([-v[2, 1], -v[3, 1], v[0, 1], v[1, 1]]),
        ],
        axis=1,
    )


@dataclass(frozen=True)
class GreenFunctionTable:
    """Retarded Green function of the fluctuation operator on [-T, T].

    G(tau, tau') solves A G = -I delta(tau - tau') and vanishes for
    tau < tau'.  For tau > tau' column k is the kernel solution that starts
    at tau' with zero value and unit velocity along axis k, so G is
    continuous and dG/dtau jumps by the identity.
    """

    params: ModelParams
    T: float

    def __call__(self, tau, tau_prime) -> np.ndarray:
        """Evaluate G on paired arrays; returns shape (..., 2, 2)."""
        tau, tau_prime = np.broadcast_arrays(
            np.asarray(tau, dtype=float), np.asarray(tau_prime, dtype=float)
        )
        shape = tau.shape
        t = tau.ravel()
        tp = tau_prime.ravel()
        if np.any(np.abs(t) > self.T * (1 + 1e-12)) or np.any(
            np.abs(tp) > self.T * (1 + 1e-12)
        ):
            raise ValueError("tau and tau' must lie in [-T, T]")
        coef = _coefficients(self.params, tp)  # (4, 2, n)
        phis = basis_values(self.params, t)  # (4, 2, n)
        G = np.einsum("iam,ikm->mak", phis, coef)
        G[t < tp] = 0.0
        return G.reshape(shape + (2, 2))

    def derivative(self, tau, tau_prime) -> np.ndarray:
        """dG/dtau (right-sided at tau = tau')."""
        t = np.atleast_1d(np.asarray(tau, dtype=float))
        tp = np.atleast_1d(np.asarray(tau_prime, dtype=float))
        t, tp = np.broadcast_arrays(t, tp)
        coef = _coefficients(self.params, tp)
        d = basis_values(self.params, t, 1)
        G = np.einsum("iam,ikm->mak", d, coef)
        G[t < tp] = 0.0
        return G

    def at_horizon(self, tau_prime) -> np.ndarray:
        return self(np.full_like(np.asarray(tau_prime, dtype=float), self.T), tau_prime)

    def asymptotic_at_horizon(self, tau_prime) -> np.ndarray:
        """Large-T form of G(T, tau').

        At the snapped horizon phi_1, phi_3 point along eta and phi_2,
        phi_4 along xi, with xi_2(T) ~ -2 exp(-Omega T),
        xi_4(T) ~ -exp(Omega T)/(4 Omega), eta_1(T) ~ 2 exp(-Omega T) and
        eta_3(T) ~ exp(Omega T)/(4 Omega).
        """
        Omega = self.params.Omega
        tp = np.asarray(tau_prime, dtype=float)
        v = basis_values(self.params, np.atleast_1d(tp))
        small = 2 * math.exp(-Omega * self.T)
        big = math.exp(Omega * self.T) / (4 * Omega)
        G = np.zeros(v.shape[2:] + (2, 2))
        for k in range(2):
            G[:, 0, k] = small * v[3, k] - big * v[1, k]
            G[:, 1, k] = big * v[0, k] - small * v[2, k]
        return G.reshape(tp.shape + (2, 2))


def green_function(params: ModelParams, T: float, tau, tau_prime, *, snap: bool = True):
    """G(tau, tau') as a 2x2 matrix (or stack of them).

    Examples
    --------
    >>> p = ModelParams(1.0, 0.01, mode="euclidean")
    >>> green_function(p, 8.0, -1.0, 0.0)
    array([[0., 0.],
           [0., 0.]])
    """
    _euclidean_frequency(params)
    T = snap_horizon(params, T) if snap else float(T)
    return GreenFunctionTable(params, T)(tau, tau_prime)


def _green_integral(table, lead):
    """I = int G(T, tau') phi_lead(tau') dtau' over [-T, T]."""

    def integrand(tp):
        G = table.at_horizon(np.atleast_1d(tp))[0]
        phi = basis_values(table.params, [tp])[lead, :, 0]
        return G @ phi

    val, err = integrate.quad_vec(
        integrand, -table.T, table.T, epsrel=1e-11, epsabs=0.0,
        points=(0.0,), limit=400,
    )
    if not np.all(np.isfinite(val)) or err > 1e-6 * np.max(np.abs(val)):
        raise QuadratureError("Green-function integral did not converge", err)
    return val


def _perturbed_eigenvalue(table, lead):
    others = [i for i in (0, 1) if i != lead] + [2, 3]
    T = table.T
    at = basis_values(table.params, [-T, T])  # (4, 2, 2)
    I = _green_integral(table, lead)
    A = np.zeros((4, 4))
    b = np.zeros(4)
    for side in (0, 1):
        for comp in (0, 1):
            row = 2 * side + comp
            A[row, :3] = [at[i, comp, side] for i in others]
            if side == 1:
                A[row, 3] = -I[comp]
            b[row] = -at[lead, comp, side]
    scale = np.max(np.abs(A), axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    cond = np.linalg.cond(As)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(
            "boundary-perturbation system is singular to working precision; "
            "try a different (snapped) horizon",
            cond,
        )
    x = np.linalg.solve(As, b) / scale
    return float(x[3])


def extract_zero_eigenvalues(params: ModelParams, T: float, *, snap: bool = True):
    """Lowest Dirichlet eigenvalues lifted from the two zero modes.

    Returns ``(lambda_phi, lambda_tau)``.  Large-T laws:
    lambda_phi ~ 8 Omega**2 exp(-2 Omega T) and
    lambda_tau ~ 24 Omega**2 exp(-2 Omega T).

    Raises
    ------
    RegimeError
        If Omega*T < 6 after snapping.
    IllConditionedError
        If the 4x4 boundary system has condition number above 1e12.
    """
    Omega = _euclidean_frequency(params)
    T = snap_horizon(params, T) if snap else float(T)
    if Omega * T < 6:
        raise RegimeError(f"Omega*T = {Omega * T:.3g} < 6: horizon too short")
    table = GreenFunctionTable(params, T)
    return _perturbed_eigenvalue(table, 0), _perturbed_eigenvalue(table, 1)


def zero_eigenvalues_by_shooting(params: ModelParams, T: float, *, snap: bool = True):
    """Independent route: roots of det J(T; lambda) in lambda.

    Integrates (A - lambda) phi = 0 at high precision and brackets the two
    roots between 0 and 48 Omega**2 exp(-2 Omega T).  Much slower than
    :func:`extract_zero_eigenvalues`; meant as an oracle.
    """
    Omega = _euclidean_frequency(params)
    T = snap_horizon(params, T) if snap else float(T)
    unit = Omega**2 * math.exp(-2 * Omega * T)

    def det(x):
        *_, d = _taylor.integrate(Omega, params.omega_c, T, shift=x * unit, samples=1)
        return float(d)

    lam_phi = optimize.brentq(det, 0.0, 16.0, xtol=1e-9, rtol=1e-11)
    lam_tau = optimize.brentq(det, 16.0, 48.0, xtol=1e-9, rtol=1e-11)
    return lam_phi * unit, lam_tau * unit


@dataclass(frozen=True)
class ModeNorms:
    """L2 norms of the two zero modes, by quadrature and in closed form."""

    norm_phi1: float
    norm_phi2: float
    closed_phi1: float
    closed_phi2: float
    cross: float  # int phi1 . phi2, zero by parity


def mode_norms(params: ModelParams) -> ModeNorms:
    """Norms of phi_1 = sech (rotation) and phi_2 = tanh sech (translation).

    Quadrature over |tau| <= 40/Omega plus the explicit exponential tails.
    Closed forms: sqrt(2/Omega) and sqrt(2/(3 Omega)).
    """
    p = params.euclidean_equivalent()
    Omega = p.Omega
    L = TRUNCATE / Omega

    def integrands(t):
        v = basis_values(p, t)
        return np.stack(
            [np.sum(v[0] ** 2, axis=0), np.sum(v[1] ** 2, axis=0), np.sum(v[0] * v[1], axis=0)]
        )

    n1, n2, cross = _line_quadrature(integrands, L, 0.5 / Omega)
    th = math.tanh(Omega * L)
    n1 += 2 * (1 - th) / Omega
    n2 += 2 * (1 - th**3) / (3 * Omega)
    return ModeNorms(
        norm_phi1=math.sqrt(n1),
        norm_phi2=math.sqrt(n2),
        closed_phi1=math.sqrt(2 / Omega),
        closed_phi2=math.sqrt(2 / (3 * Omega)),
        cross=float(cross),
    )


def zero_mode_jacobian(params: ModelParams, norms: ModeNorms | None = None) -> float:
    """Jacobian of the change to collective coordinates (phi0, tau0).

    Omega**3 / (2 alpha) * ||phi_1|| * ||phi_2||, which equals
    Omega**2 / (sqrt(3) alpha).
    """
    if norms is None:
        norms = mode_norms(params)
    Omega = params.Omega
    return Omega**3 / (2 * params.alpha) * norms.norm_phi1 * norms.norm_phi2


def faddeev_popov_determinant(params: ModelParams) -> float:
    """Faddeev-Popov determinant from overlaps of orbit tangents with modes.

    det [[<d r/d phi0, chi_1>, <d r/d phi0, chi_2>],
         [<d r/d tau0, chi_1>, <d r/d tau0, chi_2>]]

    with chi_i = phi_i / ||phi_i|| the normalized zero modes, evaluated by
    quadrature along the phi0 = 0 bounce.  Returns the absolute value.
    """
    p = params.euclidean_equivalent()
    Omega = p.Omega
    norms = mode_norms(p)
    L = TRUNCATE / Omega

    def overlaps(t):
        b = bounce(p, 0.0, t)
        d_phi0 = np.stack([-b.y, b.x])
        d_tau = -np.stack(bounce_velocity(p, 0.0, t))
        v = basis_values(p, t)
        chi1 = v[0] / norms.norm_phi1
        chi2 = v[1] / norms.norm_phi2
        return np.stack(
            [
                np.sum(d_phi0 * chi1, axis=0),
                np.sum(d_phi0 * chi2, axis=0),
                np.sum(d_tau * chi1, axis=0),
                np.sum(d_tau * chi2, axis=0),
            ]
        )

    M = _line_quadrature(overlaps, L, 0.5 / Omega).reshape(2, 2)
    return abs(float(np.linalg.det(M)))


def hyperbolic_integrals() -> tuple[float, float, float]:
    """Quadrature of sech**2, sinh**2/cosh**4 and sech**4 over the real line.

    Exact values 2, 2/3 and 4/3.
    """

    def f(x):
        sech2 = 1 / np.cosh(x) ** 2
        return np.stack([sech2, np.tanh(x) ** 2 * sech2, sech2**2])

    # the neglected tails beyond |x| = 40 are below 1e-34
    return tuple(float(v) for v in _line_quadrature(f, TRUNCATE, 0.5))


@dataclass(frozen=True)
class RateBreakdown:
    """Every intermediate of the instanton-gas rate.

    ``J`` and ``log_J0`` are the Jacobi determinants at the snapped
    horizon ``T``; ``K_magnitude`` is |K| with |K| * 2 pi = 2 Omega**4 / alpha
    in the large-T limit.
    """

    Omega: float
    T: float
    S_cl: float
    J: float
    log_J0: float
    lambda_phi: float
    lambda_tau: float
    norm_phi1: float
    norm_phi2: float
    jacobian_phi_tau: float
    K_magnitude: float
    Gamma: float
    Gamma_closed: float

    @property
    def relative_deviation(self) -> float:
        return (self.Gamma - self.Gamma_closed) / self.Gamma_closed

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["relative_deviation"] = self.relative_deviation
        return d


def assemble_rate(params: ModelParams, T: float, *, method: str = "taylor") -> RateBreakdown:
    """Decay rate from the fluctuation determinants.

    Physical-mode parameters are mapped to the Euclidean set with the same
    Omega (the fluctuation spectrum depends on the field only through
    Omega); the cyclotron frequency is kept for the horizon snapping.

    Raises
    ------
    RegimeError
        If Omega*T < 8 after snapping.
    """
    p = params.euclidean_equivalent()
    Omega = p.Omega
    T = snap_horizon(p, T)
    if Omega * T < 8:
        raise RegimeError(
            f"Omega*T = {Omega * T:.3g} < 8: large-T asymptotics unreliable"
        )
    S = classical_action(params)
    detJ = determinant_J(p, T, method=method, snap=False)
    detJ0 = determinant_J0(p, T, method=method, snap=False)
    lam_phi, lam_tau = extract_zero_eigenvalues(p, T, snap=False)
    norms = mode_norms(p)
    jac = zero_mode_jacobian(p, norms)
    log_K = (
        math.log(0.5)
        + 0.5 * (detJ0.log_abs + math.log(lam_phi) + math.log(lam_tau) - detJ.log_abs)
        + math.log(jac)
        - math.log(2 * math.pi)
    )
    K = math.exp(log_K)
    Gamma = 4 * math.pi * math.exp(log_K - S)
    closed = 4 * Omega**4 / params.alpha * math.exp(-S)
    return RateBreakdown(
        Omega=Omega,
        T=T,
        S_cl=S,
        J=detJ.value,
        log_J0=detJ0.log_abs,
        lambda_phi=lam_phi,
        lambda_tau=lam_tau,
        norm_phi1=norms.norm_phi1,
        norm_phi2=norms.norm_phi2,
        jacobian_phi_tau=jac,
        K_magnitude=K,
        Gamma=Gamma,
        Gamma_closed=closed,
    )
