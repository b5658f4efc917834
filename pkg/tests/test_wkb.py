import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magtunnel import Mode, ModelParams, RegimeError
from magtunnel.model import decay_rate_closed_form
from magtunnel.wkb import (
    GROUND_STATE,
    Method,
    barrier_integral,
    effective_potential,
    momentum,
    normalization_constant,
    turning_points,
    wkb_decay_rate,
)


def test_turning_points_example():
    p = ModelParams(1.0, 0.01)
    r1, r2 = turning_points(p, 1.0)
    assert r1 == pytest.approx(1.4446873, abs=1e-7)
    assert r2 == pytest.approx(6.9219129, abs=1e-7)
    assert effective_potential(p, [r1, r2]) == pytest.approx([1.0, 1.0], abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    omega=st.floats(0.3, 3),
    omega_c=st.floats(0, 3),
    alpha=st.floats(1e-3, 0.5),
    frac=st.floats(0.0, 0.999),
)
def test_turning_points_are_roots(omega, omega_c, alpha, frac):
    p = ModelParams(omega, alpha, omega_c)
    E = frac * p.Omega**4 / (16 * alpha)
    r1, r2 = turning_points(p, E)
    assert 0 <= r1 <= r2
    scale = max(E, p.Omega**2 * r2**2)
    assert abs(effective_potential(p, r1) - E) < 1e-11 * scale
    assert abs(effective_potential(p, r2) - E) < 1e-11 * scale


def test_energy_outside_barrier_rejected():
    p = ModelParams(1.0, 0.01)
    for E in (-0.1, 25.0, 30.0, math.inf):
        with pytest.raises(RegimeError):
            turning_points(p, E)


def test_field_enters_through_physical_omega():
    a = ModelParams(1.0, 0.01, 1.0, Mode.PHYSICAL)
    b = ModelParams(1.0, 0.01, 1.0, Mode.EUCLIDEAN)
    # the radial problem always uses omega**2 + omega_c**2/4
    assert turning_points(a, 0.5) == turning_points(b, 0.5)
    assert barrier_integral(a, 0.0) == pytest.approx(a.action, rel=1e-10)


def test_momentum_vanishes_outside():
    p = ModelParams(1.0, 0.01)
    r1, r2 = turning_points(p, 1.0)
    m = momentum(p, 1.0, np.array([0.5 * r1, 0.5 * (r1 + r2), 7.0]))
    assert m[0] == 0.0 and m[1] > 0 and m[2] == 0.0


def _mp_barrier(Omega, alpha, E):
    mpmath.mp.dps = 30
    Omega, alpha, E = map(mpmath.mpf, (Omega, alpha, E))
    disc = mpmath.sqrt(Omega**4 - 16 * alpha * E)
    u2 = (Omega**2 + disc) / (4 * alpha)
    r1, r2 = mpmath.sqrt(E / (alpha * u2)), mpmath.sqrt(u2)
    f = lambda r: mpmath.sqrt(max(2 * (Omega**2 * r**2 / 2 - alpha * r**4 - E), 0))
    return 2 * mpmath.quad(f, [r1, (r1 + r2) / 2, r2])


@pytest.mark.parametrize("E", [0.0, 0.001, 1.0, 6.0])
def test_direct_barrier_against_mpmath(E):
    p = ModelParams(1.0, 0.01)
    assert barrier_integral(p, E) == pytest.approx(float(_mp_barrier(1.0, 0.01, E)), rel=1e-10)


def test_three_region_example_and_zero():
    p = ModelParams(1.0, 0.01)
    assert barrier_integral(p, 0.01, Method.THREE_REGION) == pytest.approx(33.21737, abs=1e-5)
    assert barrier_integral(p, 0.0, "three_region") == pytest.approx(100 / 3, rel=1e-15)


def test_expansion_error_shrinks():
    p = ModelParams(1.0, 0.01)
    gaps = [
        abs(barrier_integral(p, E) - barrier_integral(p, E, "three_region"))
        for E in (0.01, 0.003, 0.001, 0.0003)
    ]
    assert gaps[0] < 1e-3
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_ground_state_profile():
    p = ModelParams(1.0, 0.01)
    w = wkb_decay_rate(p, GROUND_STATE)
    assert w.E == 1.0
    assert w.W == pytest.approx(26.29201352, abs=1e-7)
    assert w.W0_quadrature == pytest.approx(w.W0, rel=1e-12)
    assert w.C == pytest.approx(math.sqrt(1 / (2 * math.pi * math.e)))
    assert w.D_assembled == pytest.approx(decay_rate_closed_form(p), rel=1e-13)
    # the direct ground-state rate sits a few percent above the assembled one at S = 33
    assert 0 < w.relative_gap < 0.06


def test_ground_state_gap_closes_with_action():
    gaps = [wkb_decay_rate(ModelParams(1.0, a)).relative_gap for a in (0.01, 0.005, 0.002, 0.001)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.01


def test_ground_state_above_barrier_rejected():
    # S = 1/(3 alpha) = 10/3 puts the barrier top 3S/16 = 0.625 below Omega = 1
    with pytest.raises(RegimeError):
        wkb_decay_rate(ModelParams(1.0, 0.1))


def test_angular_momentum_rejected():
    with pytest.raises(RegimeError):
        wkb_decay_rate(ModelParams(1.0, 0.01), l=1)


def test_normalization_constant():
    assert normalization_constant(ModelParams(2.0, 0.01)) == pytest.approx(
        math.sqrt(2 / (2 * math.pi * math.e))
    )
