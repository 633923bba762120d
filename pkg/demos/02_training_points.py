"""
Training points: uniform draws against Latin hypercube
======================================================
"""

# %%
import numpy as np

from burgers_pinn import sampler

uni = sampler.sample_uniform(n0=50, nb=50, nf=1000, seed=0)
lhs = sampler.sample_lhs(n0=50, nb=50, nf=1000, seed=0)
print(uni.sizes, uni.digest()[:16])

# %% [markdown]
# Count points per x-stratum. A hypercube design puts exactly one point in
# each of the nf strata; iid uniform draws leave some empty and double up others.

# %%
def occupancy(values, lo, hi, n):
    idx = np.clip(((values - lo) / (hi - lo) * n).astype(int), 0, n - 1)
    return np.bincount(idx, minlength=n)

for name, d in (("uniform", uni), ("lhs", lhs)):
    occ = occupancy(d.xr_x, -1, 1, 1000)
    print(f"{name:8s} empty strata {np.sum(occ == 0):4d}  max per stratum {occ.max()}")

# %% [markdown]
# The initial line carries u = -sin(pi x); the boundary lines alternate x = -1, +1.

# %%
print(uni.x0_x[:3], uni.x0_u[:3])
print(uni.xb_x[:6])
