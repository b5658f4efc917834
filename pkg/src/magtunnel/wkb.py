"""
Radial WKB route to the decay rate.

For zero angular momentum the magnetic field only renormalizes the
oscillator frequency, so the radial problem sees

    U_eff(r) = Omega**2 r**2 / 2 - alpha r**4,   Omega**2 = omega**2 + omega_c**2 / 4

(the physical-field Omega, whatever mode the parameters carry).  The
barrier integral W(E) = 2 int_{r1}^{r2} p dr, p = sqrt(2 (U_eff - E)), is
evaluated by direct quadrature and by its small-energy expansion

    W(E) ~ W(0) - E/Omega - (E/Omega) ln(4 Omega**4 / (alpha E)),

and the outgoing current from the normalized ground state gives

    D = (Omega / e) exp(-W(E))  at E = Omega,

which with the expansion reduces to (4 Omega**4 / alpha) exp(-W(0)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError, RegimeError
from .model import Mode, ModelParams, rate_from_action

__all__ = [
    "Method",
    "GROUND_STATE",
    "WkbProfile",
    "effective_potential",
    "momentum",
    "turning_points",
    "barrier_integral",
    "normalization_constant",
    "wkb_decay_rate",
]


class Method(str, enum.Enum):
    DIRECT = "direct"
    THREE_REGION = "three_region"


class _GroundState:
    """Marker for the lowest level, E = Omega."""

    def __repr__(self):
        return "GROUND_STATE"


GROUND_STATE = _GroundState()


def _Omega(params: ModelParams) -> float:
    return params.with_mode(Mode.PHYSICAL).Omega


def _barrier_top(Omega, alpha):
    return Omega**4 / (16 * alpha)


def effective_potential(params: ModelParams, r):
    """U_eff(r) = Omega**2 r**2 / 2 - alpha r**4 with the physical Omega."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    Omega = _Omega(params)
    value = 0.5 * Omega**2 * r**2 - params.alpha * r**4
    return value if value.ndim else float(value)


def _check_energy(Omega, alpha, E):
    if not math.isfinite(E) or E < 0:
        raise RegimeError(f"energy must be finite and nonnegative, got {E}")
    top = _barrier_top(Omega, alpha)
    if E >= top:
        raise RegimeError(
            f"E = {E:.6g} is not below the barrier top {top:.6g}: nothing to tunnel through"
        )


def turning_points(params: ModelParams, E: float) -> tuple[float, float]:
    """Inner and outer turning points (r1, r2) of U_eff(r) = E.

    Solved as a quadratic in u = r**2:
    alpha u**2 - (Omega**2 / 2) u + E = 0.  The small root is taken as
    E / (alpha u2) to avoid cancellation.

    Raises
    ------
    RegimeError
        If E < 0 or E >= Omega**4 / (16 alpha).
    """
    Omega = _Omega(params)
    alpha = params.alpha
    _check_energy(Omega, alpha, E)
    disc = math.sqrt(Omega**4 - 16 * alpha * E)
    u2 = (Omega**2 + disc) / (4 * alpha)
    u1 = E / (alpha * u2)
    return math.sqrt(u1), math.sqrt(u2)


def momentum(params: ModelParams, E: float, r):
    """Under-barrier momentum p(r) = sqrt(2 (U_eff(r) - E)), zero outside."""
    diff = np.asarray(effective_potential(params, r)) - E
    return np.sqrt(np.maximum(2 * diff, 0.0))


def _direct(Omega, alpha, r1, r2):
    span = r2 - r1

    # r = r1 + span sin^2(t) removes the square-root zeros at both ends
    def f(t):
        s2 = math.sin(t) ** 2
        c2 = 1.0 - s2
        r = r1 + span * s2
        return 2 * span**2 * s2 * c2 * math.sqrt(2 * alpha * (r + r1) * (r + r2))

    val, err = integrate.quad(f, 0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-13, limit=200)
    if err > 1e-9 * max(abs(val), 1.0):
        raise QuadratureError("barrier integral did not converge", err)
    return 2 * val


def barrier_integral(params: ModelParams, E: float, method: Method | str = Method.DIRECT) -> float:
    """W(E) = 2 int p dr between the turning points.

    ``Method.DIRECT`` integrates numerically and is valid at any energy
    below the barrier top.  ``Method.THREE_REGION`` evaluates the
    small-energy expansion, accurate while E is small against the barrier.

    Examples
    --------
    >>> p = ModelParams(1.0, 0.01)
    >>> round(barrier_integral(p, 0.01, "three_region"), 5)
    33.21737
    """
    method = Method(method)
    Omega = _Omega(params)
    alpha = params.alpha
    r1, r2 = turning_points(params, E)
    if method is Method.DIRECT:
        return _direct(Omega, alpha, r1, r2)
    W0 = Omega**3 / (3 * alpha)
    if E == 0:
        return W0
    x = E / Omega
    return W0 - x - x * math.log(4 * Omega**4 / (alpha * E))


def normalization_constant(params: ModelParams) -> float:
    """C = sqrt(Omega / (2 pi e)), the under-barrier amplitude of the ground state."""
    return math.sqrt(_Omega(params) / (2 * math.pi * math.e))


@dataclass(frozen=True)
class WkbProfile:
    """WKB quantities at one energy.

    ``W`` and ``D`` come from direct quadrature; ``W_three_region`` and
    ``D_three_region`` from the small-energy expansion.  ``D_assembled``
    is (4 Omega**4 / alpha) exp(-W(0)), the value the expansion gives at
    the ground level, and ``W0_quadrature`` checks W(0) = Omega**3/(3 alpha)
    numerically.
    """

    E: float
    r1: float
    r2: float
    W: float
    W_three_region: float
    W0: float
    W0_quadrature: float
    C: float
    D: float
    D_three_region: float
    D_assembled: float

    @property
    def relative_gap(self) -> float:
        """(D - D_assembled) / D_assembled."""
        return (self.D - self.D_assembled) / self.D_assembled


def wkb_decay_rate(params: ModelParams, E=GROUND_STATE, *, l: int = 0) -> WkbProfile:
    """Decay rate from the outgoing WKB current.

    Parameters
    ----------
    E : float or GROUND_STATE
        Energy of the decaying level; ``GROUND_STATE`` means E = Omega.
    l : int
        Angular momentum; only l = 0 is supported.

    Raises
    ------
    RegimeError
        For l != 0, energies outside [0, barrier top), or a ground level
        above the barrier top.
    """
    if l != 0:
        raise RegimeError("only zero angular momentum is supported")
    Omega = _Omega(params)
    alpha = params.alpha
    if E is GROUND_STATE:
        E = Omega
    E = float(E)
    r1, r2 = turning_points(params, E)
    W = _direct(Omega, alpha, r1, r2)
    W3 = barrier_integral(params, E, Method.THREE_REGION)
    W0 = Omega**3 / (3 * alpha)
    W0q = _direct(Omega, alpha, 0.0, Omega / math.sqrt(2 * alpha))
    if abs(W0q - W0) > 1e-8 * W0:
        raise QuadratureError("W(0) quadrature disagrees with Omega**3/(3 alpha)", abs(W0q - W0))
    pref = Omega / math.e
    return WkbProfile(
        E=E,
        r1=r1,
        r2=r2,
        W=W,
        W_three_region=W3,
        W0=W0,
        W0_quadrature=W0q,
        C=normalization_constant(params),
        D=pref * math.exp(-W),
        D_three_region=pref * math.exp(-W3),
        D_assembled=rate_from_action(Omega, alpha, W0),
    )
