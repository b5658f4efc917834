"""
Model parameters, bounce trajectory and closed-form decay rate.

A particle of unit mass moves in the rotationally symmetric inverted
double well

    U(r) = omega**2 r**2 / 2 - alpha r**4

with a transverse magnetic field of cyclotron frequency ``omega_c``
(units hbar = m = 1).  The field enters the rate only through the
effective frequency ``Omega``, whose form depends on the continuation
convention:

* ``Mode.EUCLIDEAN``: Omega**2 = omega**2 - omega_c**2 / 4.  This is the
  convention in which the bounce is a real trajectory.
* ``Mode.PHYSICAL``: Omega**2 = omega**2 + omega_c**2 / 4, the result
  after continuing back to a real magnetic field.

Converting physical units: measure lengths in units of
``sqrt(hbar / (m * omega))`` and times in units of ``1 / omega``; then
``omega -> 1``, ``omega_c -> omega_c / omega`` and
``alpha -> alpha * hbar / (m**2 * omega**3)``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, RegimeWarning

__all__ = [
    "Mode",
    "ModelParams",
    "BouncePoint",
    "derived_frequency",
    "potential",
    "bounce",
    "bounce_velocity",
    "classical_action",
    "decay_rate_closed_form",
    "rate_from_action",
]


class Mode(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class ModelParams:
    """Well and field parameters.

    Parameters
    ----------
    omega : float
        Frequency at the bottom of the well (> 0).
    alpha : float
        Quartic coefficient (> 0).
    omega_c : float
        Cyclotron frequency (>= 0).
    mode : Mode
        Continuation convention used for the effective frequency.
    """

    omega: float
    alpha: float
    omega_c: float = 0.0
    mode: Mode = Mode.PHYSICAL

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        for name in ("omega", "alpha", "omega_c"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.omega <= 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.omega_c < 0:
            raise DomainError(f"omega_c must be nonnegative, got {self.omega_c}")
        if self.mode is Mode.EUCLIDEAN and self.omega_c >= 2 * self.omega:
            raise DomainError(
                "Euclidean mode requires omega_c < 2*omega "
                f"(omega={self.omega}, omega_c={self.omega_c}); no bounce exists"
            )

    @property
    def Omega(self) -> float:
        return derived_frequency(self)

    @property
    def action(self) -> float:
        return classical_action(self)

    @property
    def barrier_height(self) -> float:
        """Top of the barrier of the effective potential, Omega**4 / (16 alpha)."""
        return self.Omega**4 / (16 * self.alpha)

    @property
    def semiclassical(self) -> bool:
        return self.action > 1

    def with_mode(self, mode: Mode) -> "ModelParams":
        return replace(self, mode=Mode(mode))

    def euclidean_equivalent(self) -> "ModelParams":
        """Euclidean-mode parameters sharing this set's effective frequency.

        Every instanton quantity depends on the field only through Omega,
        so the fluctuation pipeline for a physical field is run on the
        Euclidean parameter set with omega**2 = Omega**2 + omega_c**2 / 4.
        """
        if self.mode is Mode.EUCLIDEAN:
            return self
        Omega = self.Omega
        return ModelParams(
            omega=math.sqrt(Omega**2 + self.omega_c**2 / 4),
            alpha=self.alpha,
            omega_c=self.omega_c,
            mode=Mode.EUCLIDEAN,
        )


@dataclass(frozen=True)
class BouncePoint:
    """A point (or array of points) on the bounce trajectory."""

    tau: np.ndarray | float
    x: np.ndarray | float
    y: np.ndarray | float
    r: np.ndarray | float


def derived_frequency(params: ModelParams) -> float:
    """Effective frequency Omega under the parameter set's convention."""
    quarter = params.omega_c**2 / 4
    if params.mode is Mode.PHYSICAL:
        return math.sqrt(params.omega**2 + quarter)
    square = params.omega**2 - quarter
    if square <= 0:
        raise DomainError(
            f"Euclidean Omega**2 = {square:.6g} <= 0; bounce does not exist"
        )
    return math.sqrt(square)


def potential(params: ModelParams, r):
    """Bare potential U(r) = omega**2 r**2 / 2 - alpha r**4."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    value = 0.5 * params.omega**2 * r**2 - params.alpha * r**4
    return value if value.ndim else float(value)


def _require_euclidean(params: ModelParams):
    if params.mode is not Mode.EUCLIDEAN:
        raise DomainError(
            "the bounce is a Euclidean saddle; pass Mode.EUCLIDEAN parameters "
            "(see ModelParams.euclidean_equivalent)"
        )


def _sech(x):
    # cosh overflows past |x| ~ 710; sech is simply 0 there
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(x)


def bounce(params: ModelParams, phi0: float, tau) -> BouncePoint:
    """Instanton trajectory centred at tau = 0 with initial angle ``phi0``.

    r(tau) = Omega / (sqrt(2 alpha) cosh(Omega tau)), rotating at the
    Larmor rate: angle = -omega_c tau / 2 + phi0.
    """
    _require_euclidean(params)
    Omega = derived_frequency(params)
    tau = np.asarray(tau, dtype=float)
    r = Omega / math.sqrt(2 * params.alpha) * _sech(Omega * tau)
    angle = -0.5 * params.omega_c * tau + phi0
    x = r * np.cos(angle)
    y = r * np.sin(angle)
    if tau.ndim == 0:
        return BouncePoint(float(tau), float(x), float(y), float(r))
    return BouncePoint(tau, x, y, r)


def bounce_velocity(params: ModelParams, phi0: float, tau):
    """Time derivative (dx/dtau, dy/dtau) of :func:`bounce`."""
    _require_euclidean(params)
    Omega = derived_frequency(params)
    tau = np.asarray(tau, dtype=float)
    r = Omega / math.sqrt(2 * params.alpha) * _sech(Omega * tau)
    rdot = -Omega * np.tanh(Omega * tau) * r
    angle = -0.5 * params.omega_c * tau + phi0
    spin = -0.5 * params.omega_c
    vx = rdot * np.cos(angle) - r * spin * np.sin(angle)
    vy = rdot * np.sin(angle) + r * spin * np.cos(angle)
    return vx, vy


def classical_action(params: ModelParams) -> float:
    """Bounce action S_cl = Omega**3 / (3 alpha)."""
    return derived_frequency(params) ** 3 / (3 * params.alpha)


def rate_from_action(Omega: float, alpha: float, action: float) -> float:
    """(4 Omega**4 / alpha) * exp(-action), shared by every rate route."""
    return 4 * Omega**4 / alpha * math.exp(-action)


def _check_validity(params: ModelParams, Omega: float, action: float):
    if action <= 1:
        warnings.warn(
            f"S_cl = {action:.4g} <= 1: outside the semiclassical regime",
            RegimeWarning,
            stacklevel=3,
        )
    if Omega**4 / (16 * params.alpha) < Omega:
        warnings.warn(
            "barrier top Omega**4/(16 alpha) lies below the ground level Omega",
            RegimeWarning,
            stacklevel=3,
        )


def decay_rate_closed_form(params: ModelParams) -> float:
    """Instanton decay rate Gamma = (4 Omega**4 / alpha) exp(-S_cl).

    Equivalently ``12 * Omega * S_cl * exp(-S_cl)``.  Emits
    :class:`RegimeWarning` (never raises) when S_cl <= 1 or when the
    ground level sits above the barrier top.
    """
    Omega = derived_frequency(params)
    action = Omega**3 / (3 * params.alpha)
    _check_validity(params, Omega, action)
    return rate_from_action(Omega, params.alpha, action)
