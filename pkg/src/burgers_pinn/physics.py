"""Viscous Burgers problem, PDE residual and the composite training loss."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import network
from .autodiff import Node, Tape
from .network import MLPConfig
from .sampler import TrainingSet, initial_condition


@dataclass(frozen=True)
class BurgersProblem:
    """``u_t + u u_x = nu u_xx`` on (0, 1] x (-1, 1) with ``u(0, x) = -sin(pi x)``, ``u(t, +-1) = 0``."""

    nu: float = 0.01 / math.pi
    t_range: tuple = (0.0, 1.0)
    x_range: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"viscosity must be positive, got {self.nu}")

    def initial(self, x):
        return initial_condition(x)

    def boundary(self, t):
        return np.zeros_like(np.asarray(t, dtype=np.float64))


class LossBreakdown(NamedTuple):
    total: float
    phi_r: float
    phi_0: float
    phi_b: float


def _component(node: Node, which: str) -> Node:
    return node.tape.apply("component", node, which=which)


def residual_node(u: Node, nu: float) -> Node:
    """``u_t + u u_x - nu u_xx`` from a network output carrying its derivatives."""
    val, ux, ut, uxx = (_component(u, k) for k in ("val", "dx", "dt", "dxx"))
    return ut + val * ux - nu * uxx


def residual(params, config: MLPConfig, problem: BurgersProblem, t, x) -> np.ndarray:
    """Pointwise PDE residual of the network at ``(t, x)`` (scalars or arrays)."""
    params = network.check_params(params, config)
    tape = Tape(params)
    u = network.forward(params, config, tape.input(t, "t"), tape.input(x, "x"), tape)
    r = residual_node(u, problem.nu)
    out = r.val
    return float(out) if out.shape == () else out.copy()


def residual_of(fn: Callable[[Tape, Node, Node], Node], problem: BurgersProblem, t, x) -> np.ndarray:
    """Residual of an arbitrary hand-wired ``u = fn(tape, t, x)`` built from tape ops."""
    tape = Tape()
    u = fn(tape, tape.input(t, "t"), tape.input(x, "x"))
    return residual_node(u, problem.nu).val


def _check_data(data: TrainingSet):
    n0, nb, nf = data.sizes
    if min(n0, nb, nf) == 0:
        raise ValueError(f"every point set must be non-empty, got sizes x0={n0}, xb={nb}, xr={nf}")


def _record_loss(params, config, problem, data) -> tuple[Tape, Node, tuple[Node, Node, Node]]:
    params = network.check_params(params, config)
    _check_data(data)
    tape = Tape(params)

    u_r = network.forward(params, config, tape.input(data.xr_t, "t"), tape.input(data.xr_x, "x"), tape)
    r = residual_node(u_r, problem.nu)
    phi_r = tape.apply("mean", r * r)

    u_0 = network.forward(params, config, tape.input(data.x0_t, "t"), tape.input(data.x0_x, "x"), tape)
    e0 = _component(u_0, "val") - tape.const(data.x0_u)
    phi_0 = tape.apply("mean", e0 * e0)

    u_b = network.forward(params, config, tape.input(data.xb_t, "t"), tape.input(data.xb_x, "x"), tape)
    eb = _component(u_b, "val") - tape.const(data.xb_u)
    phi_b = tape.apply("mean", eb * eb)

    total = (phi_r + phi_0) + phi_b
    return tape, total, (phi_r, phi_0, phi_b)


def _breakdown(total: Node, terms) -> LossBreakdown:
    return LossBreakdown(float(total.val), *(float(t.val) for t in terms))


def loss(params, config: MLPConfig, problem: BurgersProblem, data: TrainingSet) -> LossBreakdown:
    """Mean squared residual plus initial and boundary misfits, unit weights."""
    _, total, terms = _record_loss(params, config, problem, data)
    return _breakdown(total, terms)


def loss_gradient(params, config: MLPConfig, problem: BurgersProblem, data: TrainingSet,
                  term: str = "total") -> tuple[LossBreakdown, np.ndarray]:
    """Loss breakdown and the gradient of one of its terms (default the total)."""
    tape, total, terms = _record_loss(params, config, problem, data)
    target = {"total": total, "phi_r": terms[0], "phi_0": terms[1], "phi_b": terms[2]}[term]
    return _breakdown(total, terms), tape.backward(target)


def pointwise_fields(params, config: MLPConfig, t, x) -> dict[str, np.ndarray]:
    """``u, u_t, u_x, u_xx`` at the given points, for diagnostics and dumps."""
    tape = Tape(network.check_params(params, config))
    u = network.forward(tape.params, config, tape.input(t, "t"), tape.input(x, "x"), tape)
    return {"u": u.value.val.copy(), "u_t": u.value.dt.copy(), "u_x": u.value.dx.copy(),
            "u_xx": u.value.dxx.copy()}
