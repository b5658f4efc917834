# %% [markdown]
# # Vortex expulsion from a small superconducting disk
#
# A trapped vortex sits in a London-energy well that exists only while the
# reduced field h = H pi R^2 / Phi0 exceeds one.  Near the centre the well
# is an inverted quartic, so the instanton rate applies with the Magnus
# force in the role of the magnetic field.  Lowering h shrinks the barrier
# until the escape rate reaches a chosen threshold: that is the expulsion
# field.  The numbers below use the SI defaults of the command-line tool.

# %%
import math

import numpy as np

from magtunnel.cli import SI
from magtunnel.vortex import (
    QuantumChannel,
    ThermalChannel,
    VortexDot,
    barrier_geometry,
    effective_action,
    expulsion_field,
    radius_sweep,
)

dot = VortexDot(
    R=SI["radius"], xi=SI["xi"], lambda_L=SI["lambda_l"], d=SI["thickness"],
    Phi0=SI["phi0"], M=SI["mass"], magnus=SI["magnus"], mu0=SI["mu0"], hbar=SI["hbar"],
)
print(f"V0 = {dot.V0:.4e} J")

# %%
for h in (1.0, 1.2, 1.5, 2.0, 3.0):
    geo = barrier_geometry(dot, h)
    if not geo.well_exists:
        print(f"h = {h}: no well")
        continue
    print(f"h = {h}: r_b = {geo.r_barrier:.4f}  dV/V0 = {geo.deltaV / dot.V0:.5f}  "
          f"S_eff = {effective_action(dot, h):.3f}")

# %% [markdown]
# Expulsion field for both channels at a threshold of one escape per
# microsecond, then as a function of disk radius.

# %%
quantum = QuantumChannel()
thermal = ThermalChannel(SI["temperature"], SI["attempt_frequency"], SI["boltzmann"])
for ch in (quantum, thermal):
    h = expulsion_field(dot, 1e6, ch)
    print(f"{ch.name:8s} h* = {h:.6f}  H* = {dot.field(h):.4e} T")

# %% [markdown]
# The thermal barrier V0 (h - 1 - ln h) depends on the radius only through
# h, so its expulsion field in reduced units is flat in R.  The quantum
# exponent carries the well curvature, which softens as R grows, so the
# quantum h* drops toward one for larger disks.

# %%
rows = radius_sweep(dot, np.linspace(20e-9, 100e-9, 9), 1e6, [quantum, thermal])
for r in rows:
    print(f"R = {r.R * 1e9:5.1f} nm  {r.channel:8s} {r.status:12s} h* = {r.h_star:.5f}")
