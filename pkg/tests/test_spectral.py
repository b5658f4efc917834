import math

import numpy as np
import pytest

from magtunnel import ModelParams, RegimeError
from magtunnel.jacobi import integrate_jacobi, snap_horizon
from magtunnel.spectral import (
    GreenFunctionTable,
    assemble_rate,
    extract_zero_eigenvalues,
    faddeev_popov_determinant,
    green_function,
    hyperbolic_integrals,
    mode_norms,
    zero_eigenvalues_by_shooting,
    zero_mode_jacobian,
)


@pytest.mark.parametrize("omega_c", [0.0, 0.8])
def test_green_function_jump_conditions(euclid, omega_c):
    p = euclid(omega_c=omega_c)
    T = snap_horizon(p, 8.0)
    g = GreenFunctionTable(p, T)
    tp = np.array([-3.0, -0.4, 0.0, 1.7])
    assert np.allclose(g(tp, tp), 0.0, atol=1e-14)
    assert np.allclose(g.derivative(tp, tp), np.eye(2), atol=1e-12)
    # retarded: zero before the source
    assert np.all(g(tp - 0.5, tp) == 0.0)


def test_green_function_matches_jacobi_columns(euclid):
    """Sourced at -T, G(tau, -T) is the Jacobi matrix with unit initial slope."""
    p = euclid(omega_c=0.6)
    T = snap_horizon(p, 8.0)
    jm = integrate_jacobi(p, T, method="taylor", n_grid=41)
    G = green_function(p, T, jm.tau, np.full_like(jm.tau, -T), snap=False)
    num = jm.values * np.exp(jm.log_scale)[:, None, None]
    scale = np.max(np.abs(num), axis=(1, 2))[1:]
    assert np.max(np.max(np.abs(G - num), axis=(1, 2))[1:] / scale) < 1e-10


def test_green_function_horizon_asymptotics(euclid):
    p = euclid(omega_c=1.0)
    g = GreenFunctionTable(p, snap_horizon(p, 8.0))
    tp = np.linspace(-2, 2, 9)
    exact = g.at_horizon(tp)
    approx = g.asymptotic_at_horizon(tp)
    assert np.max(np.abs(exact - approx)) < 1e-6 * np.max(np.abs(exact))


def test_green_function_rejects_outside(euclid):
    g = GreenFunctionTable(euclid(), 8.0)
    with pytest.raises(ValueError):
        g(9.0, 0.0)


def test_zero_eigenvalues_match_shooting(euclid):
    # a nonzero omega_c snaps to Omega T ~ 24 where the high-precision oracle is slow
    p = euclid()
    T = snap_horizon(p, 8 / p.Omega)
    lp, lt = extract_zero_eigenvalues(p, T, snap=False)
    sp_, st = zero_eigenvalues_by_shooting(p, T, snap=False)
    assert lp == pytest.approx(sp_, rel=1e-4)
    assert lt == pytest.approx(st, rel=1e-4)


@pytest.mark.parametrize("omega_t", [8.0, 12.0])
def test_zero_eigenvalue_laws(euclid, omega_t):
    p = euclid()
    lp, lt = extract_zero_eigenvalues(p, omega_t)
    unit = math.exp(-2 * omega_t)
    assert lp / (8 * unit) == pytest.approx(1, abs=1e-4)
    assert lt / (24 * unit) == pytest.approx(1, abs=1e-4)


def test_zero_eigenvalues_regime(euclid):
    with pytest.raises(RegimeError):
        extract_zero_eigenvalues(euclid(), 5.0)


@pytest.mark.parametrize("params", [ModelParams(1, 0.01), ModelParams(2.3, 0.4, 1.7)])
def test_mode_norms_and_jacobian(params):
    n = mode_norms(params)
    W = params.Omega
    assert n.norm_phi1 == pytest.approx(math.sqrt(2 / W), rel=1e-12)
    assert n.norm_phi2 == pytest.approx(math.sqrt(2 / (3 * W)), rel=1e-12)
    assert abs(n.cross) < 1e-12
    target = W**2 / (math.sqrt(3) * params.alpha)
    assert zero_mode_jacobian(params, n) == pytest.approx(target, rel=1e-12)
    assert faddeev_popov_determinant(params) == pytest.approx(target, rel=1e-12)


def test_hyperbolic_integrals():
    a, b, c = hyperbolic_integrals()
    assert (a, b, c) == pytest.approx((2, 2 / 3, 4 / 3), abs=1e-14)


def test_assembled_rate_converges_with_horizon(euclid):
    p = euclid()
    r8 = assemble_rate(p, 8.0)
    r12 = assemble_rate(p, 12.0)
    assert abs(r8.relative_deviation) < 1e-4
    assert abs(r12.relative_deviation) < abs(r8.relative_deviation)
    assert r8.K_magnitude * 2 * math.pi == pytest.approx(2 / 0.01, rel=1e-4)
    d = r8.as_dict()
    assert d["Gamma"] == r8.Gamma and "relative_deviation" in d


def test_assembled_rate_physical_mode():
    p = ModelParams(1.0, 0.01, 1.0)
    r = assemble_rate(p, 8 / p.Omega)
    assert r.T * p.Omega >= 8
    assert r.Gamma_closed == pytest.approx(4 * p.Omega**4 / 0.01 * math.exp(-p.action))
    assert abs(r.relative_deviation) < 1e-6


def test_assembled_rate_regime(euclid):
    with pytest.raises(RegimeError):
        assemble_rate(euclid(), 7.0)
