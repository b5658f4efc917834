"""
Vortex expulsion from a mesoscopic superconducting disk.

A single vortex at reduced radius r = rho / R in a disk of radius R in a
field H feels the London potential

    V(r) = V0 [h**2/4 + ln(R/xi) - h (1 - r**2) + ln(1 - r**2)],
    V0 = d Phi0**2 / (16 pi**2 lambda_L**2 mu0),  h = H pi R**2 / Phi0.

For h > 1 the centre is a metastable well bounded by a barrier at
r_b = sqrt(1 - 1/h) of height V0 (h - 1 - ln h).  Expanding to quartic
order about r = 0 gives an inverted double well, so the tunneling rate of
the vortex follows from the closed-form instanton rate.  Lowering h
shrinks the barrier; the expulsion field is where the escape rate of a
channel (quantum tunneling or thermal activation) reaches a threshold.

Constants default to natural units (mu0 = hbar = k_B = 1).  Pass SI
values for all of them to work in SI.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import DomainError, NoCrossingError, RegimeError
from .model import Mode, ModelParams, decay_rate_closed_form

__all__ = [
    "VortexDot",
    "BarrierGeometry",
    "QuantumChannel",
    "ThermalChannel",
    "SweepRow",
    "london_potential",
    "barrier_geometry",
    "quartic_fit",
    "effective_action",
    "tunneling_rate",
    "thermal_rate",
    "expulsion_field",
    "radius_sweep",
]

MAX_EXPONENT = 700.0  # default upper end of the h range: rate ~ exp(-700)
MONOTONE_GRID = 64


@dataclass(frozen=True)
class VortexDot:
    """Disk geometry, material constants and vortex dynamics.

    Parameters
    ----------
    R, xi, lambda_L, d : float
        Disk radius, coherence length, penetration depth, thickness.
    Phi0 : float
        Flux quantum.
    M : float
        Vortex mass.
    magnus : float
        Effective cyclotron frequency of the Magnus force (>= 0).
    mu0, hbar : float
        Vacuum permeability and reduced Planck constant; 1 in natural units.
    """

    R: float
    xi: float
    lambda_L: float
    d: float
    Phi0: float = 1.0
    M: float = 1.0
    magnus: float = 0.0
    mu0: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("R", "xi", "lambda_L", "d", "Phi0", "M", "magnus", "mu0", "hbar"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
        if not self.R > self.xi > 0:
            raise DomainError(f"need R > xi > 0, got R={self.R}, xi={self.xi}")
        for name in ("lambda_L", "d", "Phi0", "M", "mu0", "hbar"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if self.magnus < 0:
            raise DomainError("magnus must be nonnegative")

    @property
    def V0(self) -> float:
        """Energy scale d Phi0**2 / (16 pi**2 lambda_L**2 mu0)."""
        return self.d * self.Phi0**2 / (16 * math.pi**2 * self.lambda_L**2 * self.mu0)

    def field(self, h: float) -> float:
        """Applied field H for reduced field h."""
        return h * self.Phi0 / (math.pi * self.R**2)


@dataclass(frozen=True)
class BarrierGeometry:
    h: float
    r_barrier: float  # nan when there is no well
    deltaV: float
    well_exists: bool


def london_potential(dot: VortexDot, h: float, r):
    """London energy of the vortex at reduced radius r in [0, 1)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise DomainError("reduced radius must lie in [0, 1)")
    q = 1 - r**2
    value = dot.V0 * (h**2 / 4 + math.log(dot.R / dot.xi) - h * q + np.log(q))
    return value if value.ndim else float(value)


def _check_h(h):
    if not (math.isfinite(h) and h > 0):
        raise DomainError(f"reduced field must be positive, got {h}")


def barrier_geometry(dot: VortexDot, h: float) -> BarrierGeometry:
    """Barrier top position and height; the well exists only for h > 1."""
    _check_h(h)
    if h <= 1:
        return BarrierGeometry(h, math.nan, 0.0, False)
    # h - 1 - ln h, accurate near h = 1
    dv = dot.V0 * ((h - 1) - math.log1p(h - 1))
    return BarrierGeometry(h, math.sqrt(1 - 1 / h), dv, True)


def quartic_fit(dot: VortexDot, h: float) -> ModelParams:
    """Quartic Taylor model of the well, per unit vortex mass.

    V = V0 [const + (h - 1) r**2 - r**4 / 2 + O(r**6)] in rho = r R becomes
    omega**2 = 2 V0 (h - 1) / (M R**2), alpha = V0 / (2 M R**4); the
    Magnus frequency plays omega_c (physical field).
    """
    _check_h(h)
    if h <= 1:
        raise RegimeError(f"no well at h = {h} <= 1")
    omega = math.sqrt(2 * dot.V0 * (h - 1) / (dot.M * dot.R**2))
    alpha = dot.V0 / (2 * dot.M * dot.R**4)
    return ModelParams(omega=omega, alpha=alpha, omega_c=dot.magnus, mode=Mode.PHYSICAL)


def _scaled(dot, params):
    # restoring M and hbar: S = M Omega**3 / (3 alpha hbar), i.e. alpha -> alpha hbar / M
    return replace(params, alpha=params.alpha * dot.hbar / dot.M)


def effective_action(dot: VortexDot, h: float) -> float:
    """Instanton exponent S_eff = M Omega**3 / (3 alpha hbar) of the quartic model."""
    return _scaled(dot, quartic_fit(dot, h)).action


def tunneling_rate(dot: VortexDot, h: float) -> float:
    """Quantum escape rate of the vortex from the quartic model.

    Emits RegimeWarning near h = 1 where the exponent is no longer large.
    The rate falls with h once S_eff > 4/3.
    """
    return decay_rate_closed_form(_scaled(dot, quartic_fit(dot, h)))


def _log_quantum(dot, h):
    p = _scaled(dot, quartic_fit(dot, h))
    Omega = p.Omega
    return math.log(4 * Omega**4 / p.alpha) - p.action


def thermal_rate(
    dot: VortexDot, h: float, temperature: float, attempt_frequency: float,
    boltzmann: float = 1.0,
) -> float:
    """Arrhenius rate nu exp(-Delta V / (k_B T)) with the exact London barrier."""
    return math.exp(_log_thermal(dot, h, temperature, attempt_frequency, boltzmann))


def _log_thermal(dot, h, temperature, nu, kB):
    if not (temperature > 0 and nu > 0 and kB > 0):
        raise DomainError("temperature, attempt frequency and k_B must be positive")
    geo = barrier_geometry(dot, h)
    if not geo.well_exists:
        raise RegimeError(f"no well at h = {h} <= 1")
    return math.log(nu) - geo.deltaV / (kB * temperature)


@dataclass(frozen=True)
class QuantumChannel:
    name = "quantum"

    def log_rate(self, dot, h):
        return _log_quantum(dot, h)

    def domain(self, dot):
        """(h_lo, h_hi) on which the rate decreases monotonically in h."""
        # rate ~ S**(4/3) exp(-S) peaks at S = 4/3
        return _h_for_action(dot, 4 / 3), _h_for_action(dot, MAX_EXPONENT)


@dataclass(frozen=True)
class ThermalChannel:
    temperature: float
    attempt_frequency: float
    boltzmann: float = 1.0
    name = "thermal"

    def log_rate(self, dot, h):
        return _log_thermal(dot, h, self.temperature, self.attempt_frequency, self.boltzmann)

    def domain(self, dot):
        # Delta V / V0 = h - 1 - ln h reaches the target on h > 1
        target = MAX_EXPONENT * self.boltzmann * self.temperature / dot.V0
        hi = optimize.brentq(lambda h: h - 1 - math.log(h) - target, 1.0, 2 + 2 * target)
        return _H_FLOOR, hi


_H_FLOOR = 1 + 1e-12


def _h_for_action(dot, S):
    """Reduced field at which the quartic-model exponent equals S."""
    alpha = dot.V0 / (2 * dot.M * dot.R**4) * dot.hbar / dot.M
    Omega = (3 * alpha * S) ** (1 / 3)
    omega2 = Omega**2 - dot.magnus**2 / 4
    if omega2 <= 0:
        return _H_FLOOR
    return max(_H_FLOOR, 1 + omega2 * dot.M * dot.R**2 / (2 * dot.V0))


def expulsion_field(dot: VortexDot, rate_threshold: float, channel, *, h_max: float | None = None):
    """Reduced field h* at which the channel's escape rate equals the threshold.

    The rate is checked to be strictly decreasing in h on the search range
    before bisection on ln(rate).  ``h_max`` defaults to where the rate
    falls to ~exp(-700).

    Raises
    ------
    NoCrossingError
        If the threshold lies outside the rates reachable on the range.
    """
    if not rate_threshold > 0:
        raise DomainError("rate threshold must be positive")
    lo, hi = channel.domain(dot)
    if h_max is not None:
        hi = float(h_max)
    if hi <= lo:
        raise RegimeError(f"empty search range: h_max = {hi} <= {lo}")
    grid = np.linspace(lo, hi, MONOTONE_GRID)
    logs = np.array([channel.log_rate(dot, h) for h in grid])
    if not np.all(np.diff(logs) < 0):
        raise RegimeError(f"{channel.name} rate is not monotone in h on [{lo}, {hi}]")
    target = math.log(rate_threshold)
    if not logs[-1] <= target <= logs[0]:
        raise NoCrossingError(rate_threshold, math.exp(logs[-1]), math.exp(logs[0]))
    k = int(np.searchsorted(-logs, -target))
    a, b = grid[max(k - 1, 0)], grid[min(k, len(grid) - 1)]
    if a == b:
        return float(a)
    return optimize.bisect(
        lambda h: channel.log_rate(dot, h) - target, a, b, xtol=1e-15, rtol=1e-15, maxiter=400
    )


@dataclass(frozen=True)
class SweepRow:
    R: float
    channel: str
    h_star: float
    H_star: float
    status: str


def _sweep_point(dot, R, threshold, channel, h_max):
    d = replace(dot, R=float(R))
    try:
        h = expulsion_field(d, threshold, channel, h_max=h_max)
    except NoCrossingError:
        return SweepRow(float(R), channel.name, math.nan, math.nan, "no_crossing")
    return SweepRow(float(R), channel.name, h, d.field(h), "ok")


def radius_sweep(
    dot_template: VortexDot, radii, rate_threshold: float, channels, *,
    jobs: int = 1, h_max: float | None = None,
):
    """Expulsion field for every radius and channel.

    Rows come out radius-major in input order whatever ``jobs`` is; a
    threshold a channel cannot reach gives a ``no_crossing`` row instead
    of stopping the sweep.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0:
        raise DomainError("radii must be a non-empty 1D sequence")
    if np.any(np.diff(radii) < 0):
        raise DomainError("radii must be sorted ascending")
    tasks = [(R, ch) for R in radii for ch in channels]

    def run(task):
        return _sweep_point(dot_template, task[0], rate_threshold, task[1], h_max)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, tasks))
    return [run(t) for t in tasks]
