import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from magtunnel import (
    DomainError,
    Mode,
    ModelParams,
    RegimeWarning,
    bounce,
    classical_action,
    decay_rate_closed_form,
    derived_frequency,
    potential,
)
from magtunnel.model import bounce_velocity, rate_from_action


def test_frequency_conventions():
    assert derived_frequency(ModelParams(1, 0.01, 0, Mode.EUCLIDEAN)) == 1.0
    assert derived_frequency(ModelParams(1, 0.01, 0, Mode.PHYSICAL)) == 1.0
    assert derived_frequency(ModelParams(1, 0.01, 1, Mode.EUCLIDEAN)) == pytest.approx(
        math.sqrt(1 - 0.25), rel=1e-15
    )
    assert derived_frequency(ModelParams(1, 0.01, 1, Mode.PHYSICAL)) == pytest.approx(
        1.1180340, abs=1e-7
    )


def test_euclidean_requires_bounce():
    with pytest.raises(DomainError):
        ModelParams(1, 0.01, 2.0, Mode.EUCLIDEAN)
    # the physical convention has no such limit
    assert ModelParams(1, 0.01, 2.0).Omega == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize(
    "kw",
    [dict(omega=0), dict(omega=-1), dict(alpha=0), dict(omega_c=-0.1), dict(alpha=math.nan)],
)
def test_invalid_params(kw):
    args = dict(omega=1.0, alpha=0.01, omega_c=0.0) | kw
    with pytest.raises(DomainError):
        ModelParams(**args)


def test_mode_accepts_strings():
    assert ModelParams(1, 0.1, mode="euclidean").mode is Mode.EUCLIDEAN


def test_potential_values():
    p = ModelParams(1, 0.01)
    assert potential(p, 0.0) == 0.0
    assert potential(p, 1.0) == pytest.approx(0.49, rel=1e-15)
    r = np.linspace(0, 7, 700_001)
    U = potential(p, r)
    assert r[np.argmax(U)] == pytest.approx(5.0, abs=1e-4)
    assert U.max() == pytest.approx(6.25, rel=1e-9)
    with pytest.raises(DomainError):
        potential(p, -1.0)


def _shoot_bounce(Omega, alpha, r0, t_end):
    f = lambda t, y: [y[1], Omega**2 * y[0] - 4 * alpha * y[0] ** 3]
    return integrate.solve_ivp(f, (0, t_end), [r0, 0.0], rtol=1e-12, atol=1e-14, dense_output=True)


def test_bounce_against_shooting():
    p = ModelParams(1, 0.01, mode="euclidean")
    b = bounce(p, 0.0, 0.0)
    assert b.r == pytest.approx(1 / math.sqrt(0.02), rel=1e-14)
    assert (b.x, b.y) == (b.r, 0.0)
    sol = _shoot_bounce(1.0, 0.01, b.r, 6.0)
    t = np.linspace(0, 6, 50)
    assert np.allclose(sol.sol(t)[0], bounce(p, 0.0, t).r, rtol=1e-7)


def test_bounce_decay_and_half_turn():
    p = ModelParams(1, 0.01, 1.0, "euclidean")
    W = p.Omega
    r0 = bounce(p, 0.3, 0.0).r
    for s in (-1, 1):
        assert bounce(p, 0.3, s * 30 / W).r < 1e-12 * r0
    b = bounce(p, 0.0, 2 * math.pi)
    assert b.x == pytest.approx(-b.r, rel=1e-14)
    assert abs(b.y) < 1e-14 * b.r


def test_bounce_needs_euclidean():
    with pytest.raises(DomainError):
        bounce(ModelParams(1, 0.01), 0.0, 0.0)


@pytest.mark.parametrize("omega_c", [0.0, 0.7])
def test_bounce_ode_and_zero_energy(omega_c):
    p = ModelParams(1.3, 0.02, omega_c, "euclidean")
    W, a = p.Omega, p.alpha
    tau = np.linspace(-20 / W, 20 / W, 4001)
    r = bounce(p, 0.0, tau).r
    # analytic derivatives of r = A sech(W tau)
    th = np.tanh(W * tau)
    rd = -W * th * r
    rdd = W**2 * r * (1 - 2 * (1 - th**2))
    assert np.max(np.abs(rdd - W**2 * r + 4 * a * r**3)) < 1e-8 * W**2 * r[2000]
    U_eff = 0.5 * W**2 * r**2 - a * r**4
    assert np.max(np.abs(0.5 * rd**2 - U_eff)) < 1e-8


def test_bounce_velocity_matches_finite_difference():
    p = ModelParams(1, 0.05, 0.9, "euclidean")
    h = 1e-6
    for t in (-1.3, 0.0, 0.4):
        vx, vy = bounce_velocity(p, 0.2, t)
        a, b = bounce(p, 0.2, t + h), bounce(p, 0.2, t - h)
        assert vx == pytest.approx((a.x - b.x) / (2 * h), abs=1e-7)
        assert vy == pytest.approx((a.y - b.y) / (2 * h), abs=1e-7)


@pytest.mark.parametrize(
    "params, expected",
    [
        (ModelParams(1, 1 / 3, mode="euclidean"), 1.0),
        (ModelParams(1, 0.01, mode="euclidean"), 100 / 3),
        (ModelParams(1.2, 0.05, 0.6, mode="euclidean"), None),
    ],
)
def test_action_by_quadrature(params, expected):
    W = params.Omega
    # Euclidean Lagrangian in the rotating frame reduces to rdot^2/2 + U_eff(r)
    def lag(t):
        r = bounce(params, 0.0, t).r
        rd = -W * math.tanh(W * t) * r
        return 0.5 * rd**2 + 0.5 * W**2 * r**2 - params.alpha * r**4

    val = 2 * integrate.quad(lag, 0, 40 / W, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    assert val == pytest.approx(classical_action(params), rel=1e-8)
    if expected is not None:
        assert classical_action(params) == pytest.approx(expected, rel=1e-14)


def test_action_physical_example():
    p = ModelParams(1, 0.01, 1.0)
    assert p.action == pytest.approx(1.25**1.5 / 0.03, rel=1e-14)
    assert p.action == pytest.approx(46.5847, abs=1e-4)
    # continuation as a sign flip of omega_c**2 inside Omega**2
    e = ModelParams(math.sqrt(1 + 0.5), 0.01, 1.0, "euclidean")
    assert e.action == pytest.approx(p.action, rel=1e-14)


def test_closed_form_rate_examples():
    p = ModelParams(1, 0.01)
    G = decay_rate_closed_form(p)
    assert G == pytest.approx(400 * math.exp(-100 / 3), rel=1e-14)
    assert G == pytest.approx(1.334e-12, rel=1e-3)
    q = ModelParams(1, 0.01, 2.0)
    assert q.action == pytest.approx(94.281, abs=1e-3)
    assert decay_rate_closed_form(q) == pytest.approx(1600 * math.exp(-(2**1.5) / 0.03), rel=1e-13)
    assert decay_rate_closed_form(q) < G


@settings(max_examples=60, deadline=None)
@given(
    omega=st.floats(0.2, 5),
    omega_c=st.floats(0, 5),
    S=st.floats(1.5, 200),
)
def test_rate_identities(omega, omega_c, S):
    Omega = math.sqrt(omega**2 + omega_c**2 / 4)
    p = ModelParams(omega, Omega**3 / (3 * S), omega_c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        G = decay_rate_closed_form(p)
    assert G * math.exp(p.action) * p.alpha / (4 * p.Omega**4) == pytest.approx(1, rel=1e-12)
    assert G == pytest.approx(12 * p.Omega * p.action * math.exp(-p.action), rel=1e-12)


def test_regime_warnings():
    # S <= 1 always puts the barrier (3 S / 16 in units of Omega) below Omega too
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        decay_rate_closed_form(ModelParams(1, 1.0))
    messages = " ".join(str(w.message) for w in caught)
    assert all(w.category is RegimeWarning for w in caught)
    assert "semiclassical" in messages and "barrier top" in messages
    with pytest.warns(RegimeWarning, match="barrier top"):
        # S = 1/(3*0.1) > 1 but barrier 1/1.6 < Omega
        decay_rate_closed_form(ModelParams(1, 0.1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        decay_rate_closed_form(ModelParams(1, 0.01))


def test_monotonicity():
    # increasing in alpha at fixed Omega while S > 1
    alphas = np.linspace(0.005, 0.3, 30)
    G = [rate_from_action(1.0, a, 1 / (3 * a)) for a in alphas]
    assert np.all(np.diff(G) > 0)
    # decreasing in omega_c (physical) while S > 4/3
    rates = [decay_rate_closed_form(ModelParams(1, 0.05, wc)) for wc in np.linspace(0, 3, 20)]
    assert np.all(np.diff(rates) < 0)


def test_conventions_agree_at_zero_field():
    for omega in (0.3, 1.0, 2.5):
        e = ModelParams(omega, 0.01, 0.0, "euclidean")
        p = ModelParams(omega, 0.01, 0.0, "physical")
        assert e.Omega == p.Omega
        assert e.action == p.action


def test_euclidean_equivalent_keeps_omega():
    p = ModelParams(1.0, 0.02, 1.5)
    e = p.euclidean_equivalent()
    assert e.mode is Mode.EUCLIDEAN
    assert e.Omega == pytest.approx(p.Omega, rel=1e-15)
    assert e.omega_c == p.omega_c
    assert e.euclidean_equivalent() is e
