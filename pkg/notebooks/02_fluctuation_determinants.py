# %% [markdown]
# # Fluctuation determinants on a finite horizon
#
# The Jacobi fields around the bounce grow like exp(Omega T) while their
# determinant stays of order one, so double-precision integration loses
# about 2 Omega T / ln 10 digits by tau = T.  The package integrates them
# with an arbitrary-precision Taylor series instead; this script shows the
# gap between the two.

# %%
import math

import numpy as np

from magtunnel import ModelParams, determinant_J, determinant_J0, snap_horizon
from magtunnel.jacobi import integrate_jacobi, jacobi_from_basis
from magtunnel.spectral import extract_zero_eigenvalues

p = ModelParams(1.0, 0.01, 1.0, mode="euclidean")
T = snap_horizon(p, 8 / p.Omega)
print(f"requested Omega T = 8, snapped to T = {T:.6f} (Omega T = {p.Omega * T:.4f})")

# %% [markdown]
# With omega_c > 0 the horizon snaps to a multiple of 4 pi / omega_c so
# the rotating frame returns to itself at both ends.

# %%
exact = jacobi_from_basis(p, T, np.array([T]))[0]
for label, kw in (("rk rtol 1e-10", {}), ("rk rtol 1e-13", {"rtol": 1e-13, "atol": 1e-16}),
                  ("taylor", {"method": "taylor"})):
    jm = integrate_jacobi(p, T, n_grid=3, **kw)
    num = jm.values[-1] * math.exp(jm.log_scale[-1])
    err = np.max(np.abs(num - exact)) / np.max(np.abs(exact))
    print(f"{label:15s} relative error of J(T): {err:.2e}")

# %% [markdown]
# The determinant approaches -1/Omega^2 with a correction
# -16 (Omega T - 1) exp(-2 Omega T), visible at working precision.

# %%
for x in (8, 10, 12, 16):
    q = ModelParams(1.0, 0.01, mode="euclidean")
    r = determinant_J(q, float(x))
    pred = -16 * (x - 1) * math.exp(-2 * x)
    print(f"Omega T = {x:2d}  deviation {r.deviation:+.6e}  predicted {pred:+.6e}")
    r0 = determinant_J0(q, float(x))
    print(f"             log J0 deviation {r0.deviation:+.3e}")

# %% [markdown]
# The two lifted zero modes follow 8 and 24 times Omega^2 exp(-2 Omega T).

# %%
for x in (8.0, 10.0, 12.0):
    q = ModelParams(1.0, 0.01, mode="euclidean")
    lp, lt = extract_zero_eigenvalues(q, x)
    unit = math.exp(-2 * x)
    print(f"Omega T = {x:4.1f}  lambda_phi/unit = {lp / unit:.6f}  lambda_tau/unit = {lt / unit:.6f}")
