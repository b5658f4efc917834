"""Arbitrary-precision Taylor-series integrator for the Jacobi-field system.

The coefficients of the fluctuation operator are polynomials in
q = tanh(Omega tau), sin(omega_c tau) and cos(omega_c tau), which
themselves obey polynomial ODEs.  Every Taylor coefficient therefore
follows from Cauchy-product recurrences, so each step costs O(N**2) mpfr
operations and no transcendental function is evaluated inside a step.

The quasi-zero modes make the determinant at the horizon exponentially
sensitive to rounding (roughly exp(2 Omega T) amplification), which is
why double precision is not enough beyond Omega T ~ 8.
"""

from __future__ import annotations

import math
from operator import mul

import gmpy2
import numpy as np
from gmpy2 import mpfr


def _conv(a, b, k):
    return sum(map(mul, a[: k + 1], b[k::-1]))


def precision_for(omega_T: float) -> int:
    """Working precision in bits for a horizon Omega*T."""
    return 40 + int(math.ceil(4 * omega_T / math.log(2)))


def integrate(Omega, omega_c, T, *, bounce=True, shift=0.0, bits=None, samples=None):
    """Integrate both Jacobi columns from -T to T.

    Parameters
    ----------
    Omega, omega_c : float
        Euclidean effective frequency and cyclotron frequency.
    T : float
        Horizon; the initial data sit at tau = -T.
    bounce : bool
        Expand about the bounce (True) or the trivial trajectory (False).
    shift : float
        Spectral shift: integrate (A - shift) phi = 0 instead of A phi = 0.
    bits : int, optional
        Working precision; chosen from Omega*T when omitted.
    samples : int, optional
        Approximate number of output samples (step nodes are decimated).

    Returns
    -------
    tau : ndarray, shape (m,)
    values, derivs : ndarray, shape (m, 2, 2)
        Columns are the two Jacobi fields, scaled by exp(-log_scale).
    log_scale : ndarray, shape (m,)
    det : gmpy2.mpfr
        Determinant of the Jacobi matrix at tau = T, at full precision.
    """
    if bits is None:
        bits = precision_for(Omega * T)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        return _integrate(Omega, omega_c, T, bounce, shift, bits, samples)


def _integrate(Omega, omega_c, T, bounce, shift, bits, samples):
    W = mpfr(Omega)
    wc = mpfr(omega_c)
    T = mpfr(T)
    lam = mpfr(shift)
    w2 = W * W + wc * wc / 4
    one = mpfr(1)
    zero = mpfr(0)

    # tanh has poles at distance pi/(2 Omega) from the real axis
    radius = math.pi / (2 * Omega)
    ratio = 8.0
    n_steps = max(1, int(math.ceil(float(2 * T) / (radius / ratio))))
    h = 2 * T / n_steps
    order = max(8, int(math.ceil(bits * math.log(2) / math.log(ratio))) + 4)
    if not bounce:
        # constant coefficients: the solution is entire, truncation is the
        # only constraint
        order = max(order, 24)

    every = 1 if not samples else max(1, n_steps // samples)

    cols = [[zero, zero, one, zero], [zero, zero, zero, one]]
    out_tau, out_val, out_der, out_log = [], [], [], []

    def record(t, cols):
        big = max(abs(v) for col in cols for v in col)
        scale = gmpy2.log(big) if big > 0 else zero
        inv = gmpy2.exp(-scale)
        out_tau.append(float(t))
        out_val.append([[float(cols[j][i] * inv) for j in range(2)] for i in range(2)])
        out_der.append([[float(cols[j][i + 2] * inv) for j in range(2)] for i in range(2)])
        out_log.append(float(scale))

    tau = -T
    record(tau, cols)
    for step in range(n_steps):
        if bounce:
            Uxx, Uyy, Uxy = _coefficient_series(W, wc, w2, tau, order)
            Uxx[0] -= lam
            Uyy[0] -= lam
        else:
            flat = w2 - lam
        new = []
        for col in cols:
            X = [col[0], col[2]]
            Y = [col[1], col[3]]
            for k in range(order - 2):
                ax = wc * (k + 1) * Y[k + 1]
                ay = -wc * (k + 1) * X[k + 1]
                if bounce:
                    ax += _conv(Uxx, X, k) + _conv(Uxy, Y, k)
                    ay += _conv(Uyy, Y, k) + _conv(Uxy, X, k)
                else:
                    ax += flat * X[k]
                    ay += flat * Y[k]
                d = (k + 1) * (k + 2)
                X.append(ax / d)
                Y.append(ay / d)
            x, dx = _horner(X, h)
            y, dy = _horner(Y, h)
            new.append([x, y, dx, dy])
        cols = new
        tau = -T + (step + 1) * h
        if (step + 1) % every == 0 or step == n_steps - 1:
            record(tau, cols)

    det = cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1]
    return (
        np.array(out_tau),
        np.array(out_val),
        np.array(out_der),
        np.array(out_log),
        det,
    )


def _coefficient_series(W, wc, w2, tau, order):
    # U_xx = w2 - 4 W^2 E - 2 W^2 E cos(wc tau), U_yy = w2 - 4 W^2 E + 2 W^2 E cos,
    # U_xy = 2 W^2 E sin(wc tau), with E = sech^2(W tau) = 1 - q^2
    Q = [gmpy2.tanh(W * tau)]
    S = [gmpy2.sin(wc * tau)]
    C = [gmpy2.cos(wc * tau)]
    E = []
    for k in range(order):
        e = (1 if k == 0 else 0) - _conv(Q, Q, k)
        E.append(e)
        Q.append(W * e / (k + 1))
        S.append(wc * C[k] / (k + 1))
        C.append(-wc * S[k] / (k + 1))
    W2 = W * W
    Uxx, Uyy, Uxy = [], [], []
    for k in range(order):
        ec = 2 * W2 * _conv(E, C, k)
        diag = -4 * W2 * E[k]
        Uxx.append(diag - ec)
        Uyy.append(diag + ec)
        Uxy.append(2 * W2 * _conv(E, S, k))
    Uxx[0] += w2
    Uyy[0] += w2
    return Uxx, Uyy, Uxy


def _horner(P, h):
    v = mpfr(0)
    for a in reversed(P):
        v = v * h + a
    d = mpfr(0)
    for k in range(len(P) - 1, 0, -1):
        d = d * h + k * P[k]
    return v, d
