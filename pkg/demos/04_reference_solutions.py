"""
Two independent reference solutions
===================================

The closed-form Cole-Hopf quotient (Gauss-Hermite quadrature) and a
Crank-Nicolson finite-difference solve should agree to well under 1e-3.
"""

# %%
import numpy as np

from burgers_pinn import oracle

cn = oracle.reference_crank_nicolson(nx=2048, nt=4096)
print("max |Cole-Hopf - Crank-Nicolson| on the probe grid:", oracle.cross_validate(cn))

# %% [markdown]
# The shock at x = 0 sharpens quickly and then slowly decays under viscosity.

# %%
x = np.linspace(-1, 1, 256)
for t in (0.25, 0.5, 0.75, 1.0):
    u = oracle.reference_colehopf(t, x)
    print(f"t = {t:4.2f}   u(0.5) = {u[np.argmin(abs(x - 0.5))]: .4f}   "
          f"max|du/dx| = {np.abs(np.diff(u) / np.diff(x)).max():7.2f}")
