"""Exception and warning types shared by every module."""


class TunnelingError(Exception):
    """Base class for all errors raised by :mod:`magtunnel`."""


class DomainError(TunnelingError, ValueError):
    """Parameters outside the mathematical domain of an operation."""


class RegimeError(TunnelingError, ValueError):
    """Parameters valid, but outside the regime an operation assumes.

    Examples are an energy above the barrier top, a horizon too short for
    the large-time asymptotics, or a field below the well threshold.
    """


class IntegrationError(TunnelingError, RuntimeError):
    """An ODE integration failed.

    Attributes
    ----------
    tau : float
        Euclidean time at which the integrator gave up.
    """

    def __init__(self, message, tau):
        super().__init__(f"{message} (at tau={tau:.6g})")
        self.tau = tau


class IllConditionedError(TunnelingError, RuntimeError):
    """A linear solve was too ill conditioned to trust."""

    def __init__(self, message, condition_number):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class QuadratureError(TunnelingError, RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message, abserr):
        super().__init__(f"{message} (error estimate {abserr:.3e})")
        self.abserr = abserr


class NoCrossingError(TunnelingError, ValueError):
    """A rate threshold is outside the range a channel can reach."""

    def __init__(self, threshold, gamma_min, gamma_max):
        super().__init__(
            f"rate threshold {threshold:.6g} outside achievable range "
            f"[{gamma_min:.6g}, {gamma_max:.6g}]"
        )
        self.threshold = threshold
        self.gamma_min = gamma_min
        self.gamma_max = gamma_max


class RegimeWarning(UserWarning):
    """A result was computed outside its semiclassical validity range."""
