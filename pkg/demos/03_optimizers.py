"""
Four optimizers on one small quadratic
======================================

A badly scaled quadratic shows how each update rule reacts to the same
gradients. DiffGrad damps steps when consecutive gradients barely change.
"""

# %%
import numpy as np

from burgers_pinn import optim

scales = np.array([1.0, 100.0])
target = np.array([0.5, -0.3])

def grad(theta):
    return scales * (theta - target)

# %%
for kind in optim.KINDS:
    opt = optim.make(kind, 2)
    theta = np.zeros(2)
    for step in range(300):
        theta = opt.apply(theta, grad(theta), lr=0.01)
    err = np.abs(theta - target).max()
    print(f"{kind:9s} after 300 steps: theta = {theta.round(4)}  max error {err:.2e}")

# %% [markdown]
# The friction factor lies in [0.5, 1): a half step when the gradient did
# not change at all.

# %%
print(optim.friction(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 10.0])))

# %% [markdown]
# The learning-rate schedule used for every optimizer by default.

# %%
sched = optim.LrSchedule()
print([sched.lr_at(e) for e in (0, 999, 1000, 2999, 3000, 4999)])
