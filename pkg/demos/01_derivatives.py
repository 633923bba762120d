"""
Input derivatives and parameter gradients from one tape
=======================================================

Every value on the tape carries u, du/dx, du/dt and d2u/dx2 for a whole
batch of points.  A reverse sweep then differentiates any of those four
components with respect to the parameters.
"""

# %%
import numpy as np

from burgers_pinn import MLPConfig, network
from burgers_pinn.autodiff import Tape

# %% [markdown]
# sin(pi x) first: the second x-derivative should be -pi^2 sin(pi x).

# %%
x = np.linspace(-1, 1, 5)
tape = Tape()
u = tape.apply("sin", tape.input(x, "x") * np.pi)
print("u_xx      ", u.value.dxx)
print("expected  ", -np.pi**2 * np.sin(np.pi * x))

# %% [markdown]
# Now a small tanh network. The output node holds u and its derivatives at
# every point; backward() gives d(mean u_xx)/d(theta).

# %%
cfg = MLPConfig((2, 8, 8, 1))
theta = network.init(cfg, seed=0)
tape = Tape(theta)
t_node, x_node = tape.input(np.full(5, 0.5), "t"), tape.input(x, "x")
out = network.forward(theta, cfg, t_node, x_node, tape)
print("u   ", out.value.val)
print("u_t ", out.value.dt)
mean_uxx = tape.apply("mean", tape.apply("component", out, which="dxx"))
grad = tape.backward(mean_uxx)
print(len(grad), "parameters, gradient norm", np.linalg.norm(grad))
