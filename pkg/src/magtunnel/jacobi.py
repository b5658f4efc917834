"""
Jacobi fields of the fluctuation operator about the bounce.

The second variation of the Euclidean action about the bounce is the
operator

    A = [[-d2 + U_xx,        omega_c d + U_xy],
         [-omega_c d + U_xy, -d2 + U_yy      ]]

acting on fluctuation vectors (xi, eta).  Its kernel on the whole line is
spanned by four closed-form solutions (two zero modes plus their partners),
from which the Jacobi matrix and its determinant follow.  The same
matrices are also obtained by direct numerical integration, either with an
adaptive Runge-Kutta scheme in double precision or with an
arbitrary-precision Taylor-series scheme.

All functions here work with Euclidean-mode parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np
from scipy.integrate import solve_ivp

from . import _taylor

from .errors import DomainError, IntegrationError, RegimeError
from .model import Mode, ModelParams, derived_frequency

__all__ = [
    "BasisSolutions",
    "JacobiMatrix",
    "DeterminantResult",
    "snap_horizon",
    "basis_values",
    "analytic_basis",
    "hessian_along_bounce",
    "apply_operator",
    "kernel_residual",
    "parity_defect",
    "integrate_jacobi",
    "jacobi_from_basis",
    "determinant_J",
    "determinant_J0",
    "exact_J",
    "exact_log_J0",
]

EVEN_COMPONENTS = ((0, 1), (1, 1), (2, 0), (3, 0))  # eta1, eta2, xi3, xi4
ODD_COMPONENTS = ((0, 0), (1, 0), (2, 1), (3, 1))  # xi1, xi2, eta3, eta4

RENORMALIZE_ABOVE = 1e120


def _euclidean_frequency(params: ModelParams) -> float:
    if params.mode is not Mode.EUCLIDEAN:
        raise DomainError(
            "Jacobi fields are defined about the Euclidean bounce; "
            "use params.euclidean_equivalent()"
        )
    return derived_frequency(params)


def snap_horizon(params: ModelParams, T: float) -> float:
    """Nearest horizon with sin(omega_c T / 2) = 0 and cos(omega_c T / 2) = 1.

    Returns ``T`` unchanged when omega_c = 0; otherwise the nearest
    4 pi k / omega_c with k >= 1.
    """
    if T <= 0:
        raise DomainError(f"horizon must be positive, got {T}")
    if params.omega_c == 0:
        return float(T)
    period = 4 * math.pi / params.omega_c
    k = max(1, round(T / period))
    return k * period


def _radial(k, tau, Omega):
    # scalar profiles f_k(tau) and their first two derivatives
    x = Omega * tau
    with np.errstate(over="ignore", invalid="ignore"):
        S = np.sinh(x)
        C = np.cosh(x)
        sech = 1.0 / C
        th = np.tanh(x)
    sech2 = sech * sech
    # C**2 - 2 S**2 = C**2 (1 - 2 th**2); written with tanh/sech to stay finite
    q = 1 - 2 * th * th
    if k == 1:
        f = sech
        d1 = -Omega * th * sech
        d2 = -Omega**2 * sech * q
    elif k == 2:
        f = th * sech
        d1 = Omega * sech * q
        d2 = Omega**2 * th * sech * (6 * th * th - 5)
    elif k == 3:
        f = S / (2 * Omega) + 0.5 * tau * sech
        d1 = 0.5 * C + 0.5 * sech - 0.5 * tau * Omega * th * sech
        d2 = 0.5 * Omega * S - Omega * th * sech - 0.5 * tau * Omega**2 * sech * q
    else:
        f = C / (2 * Omega) - 1.5 * sech / Omega + 1.5 * tau * th * sech
        d1 = 0.5 * S + 3 * th * sech + 1.5 * tau * Omega * sech * q
        d2 = (
            0.5 * Omega * C
            + 4.5 * Omega * sech * q
            + 1.5 * tau * Omega**2 * th * sech * (6 * th * th - 5)
        )
    return f, d1, d2


def basis_values(params: ModelParams, tau, derivative: int = 0) -> np.ndarray:
    """Closed-form kernel solutions phi_1..phi_4 or their derivatives.

    Returns an array of shape (4, 2, len(tau)): solution index, component
    (xi, eta), time sample.  ``derivative`` is 0, 1 or 2.

    phi_1 = sech(Omega tau) (sin, cos)(omega_c tau / 2) is the rotation
    zero mode, phi_2 = sinh/cosh**2 (-cos, sin) the time-translation zero
    mode; phi_3, phi_4 are their growing partners.
    """
    Omega = _euclidean_frequency(params)
    if derivative not in (0, 1, 2):
        raise ValueError("derivative must be 0, 1 or 2")
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    half = 0.5 * params.omega_c
    s = np.sin(half * tau)
    c = np.cos(half * tau)
    u = np.stack([s, c])  # u' = -half * v
    v = np.stack([-c, s])  # v' = +half * u
    out = np.empty((4, 2, tau.size))
    for k in range(1, 5):
        f, d1, d2 = _radial(k, tau, Omega)
        if k in (1, 3):
            e, rot = u, -v
        else:
            e, rot = v, u
        if derivative == 0:
            out[k - 1] = f * e
        elif derivative == 1:
            out[k - 1] = d1 * e + half * f * rot
        else:
            out[k - 1] = d2 * e + 2 * half * d1 * rot - half**2 * f * e
    return out


@dataclass(frozen=True)
class BasisSolutions:
    """Kernel solutions sampled on a symmetric grid over [-T, T].

    ``phi1``..``phi4`` have shape (n_grid, 2) holding (xi, eta).
    """

    grid: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    phi4: np.ndarray
    T: float

    @property
    def stacked(self) -> np.ndarray:
        return np.stack([self.phi1, self.phi2, self.phi3, self.phi4])


def symmetric_grid(T: float, n_grid: int) -> np.ndarray:
    """Uniform grid on [-T, T] that is exactly symmetric about zero."""
    if n_grid % 2 == 0:
        n_grid += 1
    half = np.linspace(0.0, T, n_grid // 2 + 1)
    return np.concatenate([-half[:0:-1], half])


def analytic_basis(params: ModelParams, T: float, n_grid: int = 4001) -> BasisSolutions:
    if n_grid < 2001:
        raise ValueError(f"n_grid must be at least 2001, got {n_grid}")
    if T <= 0:
        raise DomainError(f"horizon must be positive, got {T}")
    grid = symmetric_grid(T, n_grid)
    vals = basis_values(params, grid)
    phis = [vals[i].T.copy() for i in range(4)]
    return BasisSolutions(grid, *phis, T=float(T))


def hessian_along_bounce(params: ModelParams, tau):
    """Second derivatives (U_xx, U_yy, U_xy) of U along the phi0 = 0 bounce."""
    Omega = _euclidean_frequency(params)
    tau = np.asarray(tau, dtype=float)
    with np.errstate(over="ignore"):
        sech2 = 1.0 / np.cosh(Omega * tau) ** 2
    half = 0.5 * params.omega_c * tau
    flat = Omega**2 + params.omega_c**2 / 4
    Uxx = -(2 * Omega**2 + 4 * Omega**2 * np.cos(half) ** 2) * sech2 + flat
    Uyy = -(2 * Omega**2 + 4 * Omega**2 * np.sin(half) ** 2) * sech2 + flat
    Uxy = 2 * Omega**2 * sech2 * np.sin(params.omega_c * tau)
    return Uxx, Uyy, Uxy


def apply_operator(params: ModelParams, tau, phi, dphi, ddphi, *, scale=False):
    """Apply the fluctuation operator to a sampled vector field.

    ``phi``, ``dphi``, ``ddphi`` have shape (2, n).  With ``scale=True``
    also returns the pointwise sum of absolute term sizes, the natural
    yardstick for a relative residual.
    """
    wc = params.omega_c
    Uxx, Uyy, Uxy = hessian_along_bounce(params, tau)
    xi, eta = phi
    terms_x = (-ddphi[0], wc * dphi[1], Uxx * xi, Uxy * eta)
    terms_y = (-ddphi[1], -wc * dphi[0], Uyy * eta, Uxy * xi)
    out = np.stack([sum(terms_x), sum(terms_y)])
    if not scale:
        return out
    size = np.stack([sum(np.abs(t) for t in terms_x), sum(np.abs(t) for t in terms_y)])
    return out, size


def kernel_residual(params: ModelParams, tau) -> np.ndarray:
    """Max relative residual of A phi_i = 0 for each closed-form solution."""
    tau = np.asarray(tau, dtype=float)
    v0 = basis_values(params, tau, 0)
    v1 = basis_values(params, tau, 1)
    v2 = basis_values(params, tau, 2)
    worst = np.empty(4)
    for i in range(4):
        res, size = apply_operator(params, tau, v0[i], v1[i], v2[i], scale=True)
        worst[i] = np.max(np.abs(res) / np.maximum(size, np.finfo(float).tiny))
    return worst


def parity_defect(basis: BasisSolutions) -> float:
    """Largest violation of the even/odd table, relative to each component's sup."""
    phis = basis.stacked
    worst = 0.0
    for table, sign in ((EVEN_COMPONENTS, 1.0), (ODD_COMPONENTS, -1.0)):
        for i, comp in table:
            f = phis[i, :, comp]
            sup = np.max(np.abs(f))
            if sup == 0:
                continue
            worst = max(worst, np.max(np.abs(f - sign * f[::-1])) / sup)
    return worst


@dataclass(frozen=True)
class JacobiMatrix:
    """Jacobi matrix J_ik(tau) sampled on a grid.

    The true matrix is ``values[n] * exp(log_scale[n])``; the scale is
    carried separately so exponentially growing fields stay representable.
    Column k is the field started with unit velocity in direction k.
    """

    tau: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    log_scale: np.ndarray
    T: float
    method: str

    def matrix(self, index: int = -1) -> np.ndarray:
        return self.values[index] * math.exp(self.log_scale[index])

    def log_abs_det(self, index: int = -1) -> tuple[float, float]:
        """(sign, log|det|) at sample ``index``."""
        sign, logdet = np.linalg.slogdet(self.values[index])
        return float(sign), float(logdet + 2 * self.log_scale[index])


def _rhs(params, Omega, bounce, shift):
    wc = params.omega_c
    flat = Omega**2 + wc**2 / 4

    def f(tau, y):
        if bounce:
            Uxx, Uyy, Uxy = hessian_along_bounce(params, tau)
        else:
            Uxx = Uyy = flat
            Uxy = 0.0
        Uxx = Uxx - shift
        Uyy = Uyy - shift
        dy = np.empty_like(y)
        for j in (0, 4):
            xi, eta, dxi, deta = y[j : j + 4]
            dy[j] = dxi
            dy[j + 1] = deta
            dy[j + 2] = wc * deta + Uxx * xi + Uxy * eta
            dy[j + 3] = -wc * dxi + Uyy * eta + Uxy * xi
        return dy

    return f


def _integrate_rk(params, Omega, T, *, bounce, shift, rtol, atol, n_grid):
    rhs = _rhs(params, Omega, bounce, shift)
    y = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    grid = np.linspace(-T, T, n_grid)
    log_scale = 0.0
    t0 = -T
    out_y = []
    out_log = []

    def too_big(t, y):
        return np.max(np.abs(y)) - RENORMALIZE_ABOVE

    too_big.terminal = True
    too_big.direction = 1

    while True:
        pending = grid[(grid >= t0) & (grid <= T)]
        if out_y:
            pending = pending[pending > t0]
        sol = solve_ivp(
            rhs, (t0, T), y, method="DOP853", rtol=rtol, atol=atol,
            dense_output=True, events=too_big,
        )
        if sol.status == -1:
            raise IntegrationError(f"Jacobi integration failed: {sol.message}", sol.t[-1])
        t_end = sol.t[-1]
        keep = pending[pending <= t_end]
        if keep.size:
            out_y.append(sol.sol(keep).T)
            out_log.append(np.full(keep.size, log_scale))
        if sol.status == 0:
            break
        # renormalization restart: rescale the state, carry the log
        y = sol.y[:, -1]
        big = np.max(np.abs(y))
        y = y / big
        log_scale += math.log(big)
        t0 = t_end
    ys = np.concatenate(out_y)
    logs = np.concatenate(out_log)
    vals = np.stack([ys[:, [0, 4]], ys[:, [1, 5]]], axis=1)
    ders = np.stack([ys[:, [2, 6]], ys[:, [3, 7]]], axis=1)
    # normalise each sample so log_scale carries the magnitude
    mags = np.max(np.abs(np.concatenate([vals, ders], axis=1)), axis=(1, 2))
    mags = np.where(mags > 0, mags, 1.0)
    vals = vals / mags[:, None, None]
    ders = ders / mags[:, None, None]
    logs = logs + np.log(mags)
    return grid, vals, ders, logs


def integrate_jacobi(
    params: ModelParams,
    T: float,
    *,
    method: str = "rk",
    rtol: float = 1e-10,
    atol: float = 1e-14,
    n_grid: int = 4001,
    snap: bool = True,
    trivial: bool = False,
    shift: float = 0.0,
    bits: int | None = None,
) -> JacobiMatrix:
    """Integrate the Jacobi-field system numerically from tau = -T.

    Both columns start from J(-T) = 0, dJ/dtau(-T) = identity.

    Parameters
    ----------
    method : {"rk", "taylor"}
        ``"rk"``: adaptive DOP853 in double precision with local tolerance
        ``rtol`` and a renormalization restart whenever a component exceeds
        1e120.  ``"taylor"``: arbitrary-precision Taylor series (precision
        ``bits``, chosen from Omega*T by default); needed whenever the
        determinant must be resolved beyond ~exp(-2 Omega T) relative.
    trivial : bool
        Integrate about the trivial trajectory r = 0 instead of the bounce.
    shift : float
        Integrate (A - shift) phi = 0; used for eigenvalue shooting.

    Raises
    ------
    IntegrationError
        If the adaptive step size underflows.
    """
    Omega = _euclidean_frequency(params)
    T = snap_horizon(params, T) if snap else float(T)
    if method == "rk":
        tau, vals, ders, logs = _integrate_rk(
            params, Omega, T, bounce=not trivial, shift=shift,
            rtol=rtol, atol=atol, n_grid=n_grid,
        )
    elif method == "taylor":
        tau, vals, ders, logs, _ = _taylor.integrate(
            Omega, params.omega_c, T, bounce=not trivial, shift=shift,
            bits=bits, samples=n_grid,
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return JacobiMatrix(tau, vals, ders, logs, T, method)


def jacobi_from_basis(params: ModelParams, T: float, tau, *, snap: bool = True):
    """Jacobi matrix built from the closed-form basis.

    Uses the coefficient rule c = (-xi3, -xi4, xi1, xi2)(-T) for the
    first column and d = (-eta3, -eta4, eta1, eta2)(-T) for the second.
    Returns an array of shape (len(tau), 2, 2).
    """
    T = snap_horizon(params, T) if snap else float(T)
    start = basis_values(params, [-T])[:, :, 0]
    c = np.array([-start[2, 0], -start[3, 0], start[0, 0], start[1, 0]])
    d = np.array([-start[2, 1], -start[3, 1], start[0, 1], start[1, 1]])
    phis = basis_values(params, tau)
    col1 = np.einsum("i,icn->nc", c, phis)
    col2 = np.einsum("i,icn->nc", d, phis)
    return np.stack([col1, col2], axis=2)


def exact_J(params: ModelParams, T: float, *, snap: bool = True) -> float:
    """det J(T) from the closed-form basis (no large-T approximation)."""
    T = snap_horizon(params, T) if snap else float(T)
    return float(np.linalg.det(jacobi_from_basis(params, T, [T], snap=False)[0]))


def exact_log_J0(params: ModelParams, T: float, *, snap: bool = True) -> float:
    """log J0 for the trivial trajectory: J0 = sinh(2 Omega T)**2 / Omega**2."""
    Omega = _euclidean_frequency(params)
    T = snap_horizon(params, T) if snap else float(T)
    x = 2 * Omega * T
    log_sinh = x + math.log1p(-math.exp(-2 * x)) - math.log(2)
    return 2 * log_sinh - 2 * math.log(Omega)


@dataclass(frozen=True)
class DeterminantResult:
    """Numerical determinant at the horizon with its large-T limit.

    ``log_abs`` and ``sign`` are always finite; ``value`` may overflow to
    inf for J0 at very large horizons.  ``deviation`` measures the gap to
    the large-T limit at the working precision of the integrator: the
    relative difference (value - analytic) / |analytic| for J, and the
    absolute difference log_abs - log_analytic for J0.
    """

    value: float
    sign: float
    log_abs: float
    analytic: float
    log_analytic: float
    deviation: float
    T: float
    method: str


@lru_cache(maxsize=64)
def _taylor_det(Omega, omega_c, T, bounce, bits):
    if bits is None:
        bits = _taylor.precision_for(Omega * T)
    *_, det = _taylor.integrate(Omega, omega_c, T, bounce=bounce, bits=bits, samples=1)
    return det, bits


def _rk_det(params, T, trivial, rtol):
    jm = integrate_jacobi(
        params, T, method="rk", rtol=rtol, snap=False, trivial=trivial, n_grid=3
    )
    return jm.log_abs_det(-1)


def determinant_J(
    params: ModelParams,
    T: float,
    *,
    method: str = "taylor",
    rtol: float = 1e-12,
    bits: int | None = None,
    snap: bool = True,
) -> DeterminantResult:
    """Determinant of the Jacobi matrix about the bounce at tau = T.

    The large-T limit is -1 / Omega**2; the leading finite-T correction is
    of relative size 16 (Omega T - 1) exp(-2 Omega T).  Requires
    Omega*T >= 6 after snapping.

    ``method="taylor"`` (default) integrates at a precision that grows
    with Omega*T so the result is accurate well below exp(-2 Omega T);
    ``method="rk"`` uses double-precision DOP853 and degrades like
    rtol * exp(2 Omega T).
    """
    Omega = _euclidean_frequency(params)
    T = snap_horizon(params, T) if snap else float(T)
    if Omega * T < 6:
        raise RegimeError(f"Omega*T = {Omega * T:.3g} < 6: horizon too short")
    analytic = -1.0 / Omega**2
    if method == "taylor":
        det, prec = _taylor_det(Omega, params.omega_c, T, True, bits)
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            exact_limit = -1 / gmpy2.mpfr(Omega) ** 2
            deviation = float((det - exact_limit) / abs(exact_limit))
            sign = 1.0 if det > 0 else -1.0
            log_abs = float(gmpy2.log(abs(det)))
    elif method == "rk":
        sign, log_abs = _rk_det(params, T, False, rtol)
        deviation = (sign * math.exp(log_abs) - analytic) / abs(analytic)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DeterminantResult(
        value=sign * math.exp(log_abs),
        sign=sign,
        log_abs=log_abs,
        analytic=analytic,
        log_analytic=math.log(-analytic),
        deviation=deviation,
        T=T,
        method=method,
    )


def determinant_J0(
    params: ModelParams,
    T: float,
    *,
    method: str = "taylor",
    rtol: float = 1e-12,
    bits: int | None = None,
    snap: bool = True,
) -> DeterminantResult:
    """Determinant of the Jacobi matrix about the trivial trajectory.

    Large-T limit exp(4 Omega T) / (4 Omega**2); ``log_abs`` is returned
    alongside since the value itself overflows for Omega*T > ~177.
    """
    Omega = _euclidean_frequency(params)
    T = snap_horizon(params, T) if snap else float(T)
    log_analytic = 4 * Omega * T - math.log(4 * Omega**2)
    if method == "taylor":
        det, prec = _taylor_det(Omega, params.omega_c, T, False, bits)
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            W = gmpy2.mpfr(Omega)
            limit = 4 * W * gmpy2.mpfr(T) - gmpy2.log(4 * W * W)
            sign = 1.0 if det > 0 else -1.0
            log_det = gmpy2.log(abs(det))
            deviation = float(log_det - limit)
            log_abs = float(log_det)
    elif method == "rk":
        sign, log_abs = _rk_det(params, T, True, rtol)
        deviation = log_abs - log_analytic
    else:
        raise ValueError(f"unknown method {method!r}")
    with np.errstate(over="ignore"):
        value = sign * float(np.exp(log_abs))
        analytic = float(np.exp(log_analytic))
    return DeterminantResult(
        value=value,
        sign=sign,
        log_abs=log_abs,
        analytic=analytic,
        log_analytic=log_analytic,
        deviation=deviation,
        T=T,
        method=method,
    )
