"""Tunneling decay of a 2D inverted double well in a transverse magnetic field."""

from .errors import (
    DomainError,
    IllConditionedError,
    IntegrationError,
    NoCrossingError,
    QuadratureError,
    RegimeError,
    RegimeWarning,
    TunnelingError,
)
from .model import (
    BouncePoint,
    Mode,
    ModelParams,
    bounce,
    classical_action,
    decay_rate_closed_form,
    derived_frequency,
    potential,
)

from .jacobi import determinant_J, determinant_J0, integrate_jacobi, snap_horizon
from .spectral import assemble_rate, extract_zero_eigenvalues, faddeev_popov_determinant
from .vortex import (
    QuantumChannel,
    ThermalChannel,
    VortexDot,
    expulsion_field,
    radius_sweep,
)
from .wkb import GROUND_STATE, barrier_integral, turning_points, wkb_decay_rate

__version__ = "0.1.0"
