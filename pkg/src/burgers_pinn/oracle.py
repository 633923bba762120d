"""Reference solutions of the viscous Burgers problem, for measuring PINN error.

Two independent routes:

* Cole-Hopf: the exact solution as a quotient of Gaussian-weighted integrals
  of ``phi0(y) = exp(-cos(pi y) / (2 pi nu))``, evaluated with Gauss-Hermite
  quadrature after the substitution ``eta = 2 sqrt(nu t) z``.
* Crank-Nicolson finite differences: implicit trapezoidal diffusion, with
  the conservative convection term ``(u^2/2)_x`` (central differences)
  extrapolated explicitly from the two previous levels (Adams-Bashforth 2;
  forward Euler on the first step).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import roots_hermite

DEFAULT_NU = 0.01 / math.pi
SNAPSHOT_TIMES = (0.25, 0.5, 0.75, 1.0)


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ReferenceGrid:
    t_values: np.ndarray
    x_values: np.ndarray
    u: np.ndarray  # shape (len(t_values), len(x_values))
    method: str

    def interpolate(self, t, x) -> np.ndarray:
        """Values on the tensor grid ``t x x``; piecewise linear in both directions."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        x = np.asarray(x, dtype=np.float64)
        ts = self.t_values
        if t.min() < ts[0] - 1e-12 or t.max() > ts[-1] + 1e-12:
            raise ValueError(f"requested times outside [{ts[0]}, {ts[-1]}]")
        out = np.empty((len(t), len(x)))
        for i, tv in enumerate(t):
            j = int(np.clip(np.searchsorted(ts, tv, side="right") - 1, 0, len(ts) - 2))
            w = (tv - ts[j]) / (ts[j + 1] - ts[j])
            w = min(max(w, 0.0), 1.0)
            lo = np.interp(x, self.x_values, self.u[j])
            if w == 0.0:
                out[i] = lo
            else:
                out[i] = (1.0 - w) * lo + w * np.interp(x, self.x_values, self.u[j + 1])
        return out


def reference_colehopf(t, x, nu: float = DEFAULT_NU, quad_order: int = 128):
    """Exact solution at ``(t, x)``; ``x`` may be an array, ``t`` a scalar."""
    if quad_order < 8:
        raise ValueError(f"quad_order must be at least 8, got {quad_order}")
    t = float(t)
    x_arr = np.asarray(x, dtype=np.float64)
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0.0:
        out = -np.sin(np.pi * x_arr)
        return float(out) if out.ndim == 0 else out

    z, w = roots_hermite(quad_order)
    with np.errstate(divide="ignore"):
        log_w = np.log(w)
    c = 2.0 * math.sqrt(nu * t)
    y = x_arr.reshape(-1, 1) - c * z
    expo = -np.cos(np.pi * y) / (2.0 * np.pi * nu) + log_w
    shift = expo.max(axis=1, keepdims=True)
    weights = np.exp(expo - shift)
    den = weights.sum(axis=1)
    if np.any(~np.isfinite(den)) or np.any(den < 1e-300):
        raise OracleError("degenerate Cole-Hopf quotient (denominator underflow)")
    num = (np.sin(np.pi * y) * weights).sum(axis=1)
    out = (-num / den).reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


def colehopf_grid(t_values, x_values, nu: float = DEFAULT_NU, quad_order: int = 128) -> ReferenceGrid:
    t_values = np.asarray(t_values, dtype=np.float64)
    x_values = np.asarray(x_values, dtype=np.float64)
    u = np.stack([reference_colehopf(t, x_values, nu, quad_order) for t in t_values])
    return ReferenceGrid(t_values, x_values, u, "colehopf")


def reference_crank_nicolson(nx: int = 2048, nt: int = 4096, nu: float = DEFAULT_NU,
                             t_final: float = 1.0) -> ReferenceGrid:
    """Solve on ``nx`` uniform intervals of [-1, 1] and ``nt`` steps up to ``t_final``.

    Returns every time level, so rows are at ``t = k * t_final / nt``.
    """
    if nx < 512 or nt < 1024:
        raise ValueError(f"grid too coarse for a reliable reference: need nx >= 512, nt >= 1024 (got {nx}, {nt})")
    if nx % 2:
        raise ValueError("nx must be even so that x = 0 is a grid node")
    x = np.linspace(-1.0, 1.0, nx + 1)
    dx = 2.0 / nx
    dt = t_final / nt
    r = nu * dt / (2.0 * dx * dx)
    m = nx - 1
    banded = np.zeros((3, m))
    banded[0, 1:] = -r
    banded[1, :] = 1.0 + 2.0 * r
    banded[2, :-1] = -r

    # sin(pi * +-1) rounds to +-1.2e-16; the boundary value is exactly 0
    u = -np.sin(np.pi * x)
    u[0] = u[-1] = 0.0
    out = np.empty((nt + 1, nx + 1))
    out[0] = u

    def convection(v):
        flux = 0.5 * v * v
        return (flux[2:] - flux[:-2]) / (2.0 * dx)

    c_prev = None
    for n in range(nt):
        c = convection(u)
        adv = c if c_prev is None else 1.5 * c - 0.5 * c_prev
        rhs = u[1:-1] + r * (u[2:] - 2.0 * u[1:-1] + u[:-2]) - dt * adv
        u_next = np.zeros(nx + 1)
        u_next[1:-1] = solve_banded((1, 1), banded, rhs)
        if not np.all(np.isfinite(u_next)) or np.abs(u_next).max() > 10.0:
            raise OracleError(f"Crank-Nicolson went unstable at step {n + 1}; use a finer grid")
        c_prev, u = c, u_next
        out[n + 1] = u
    t = np.linspace(0.0, t_final, nt + 1)
    return ReferenceGrid(t, x, out, "crank_nicolson")


def refinement_change(nx: int = 2048, nt: int = 4096, nu: float = DEFAULT_NU) -> float:
    """Max |u_2h - u_h| over shared nodes after doubling both resolutions (convergence estimate)."""
    coarse = reference_crank_nicolson(nx, nt, nu)
    fine = reference_crank_nicolson(2 * nx, 2 * nt, nu)
    return float(np.abs(fine.u[::2, ::2] - coarse.u).max())


def relative_l2_error(pred, ref) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if pred.shape != ref.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {ref.shape}")
    denom = np.linalg.norm(ref.ravel())
    if denom == 0.0:
        raise ValueError("reference has zero norm")
    return float(np.linalg.norm((pred - ref).ravel()) / denom)


def probe_points(n_x: int = 64, x_max: float = 0.95, times=SNAPSHOT_TIMES):
    """The cross-validation probe grid: ``times`` x ``n_x`` points on [-x_max, x_max]."""
    return np.asarray(times, dtype=np.float64), np.linspace(-x_max, x_max, n_x)


def cross_validate(cn: ReferenceGrid | None = None, quad_order: int = 128, nu: float = DEFAULT_NU) -> float:
    """Max |Cole-Hopf - Crank-Nicolson| over the probe grid."""
    cn = cn if cn is not None else reference_crank_nicolson(nu=nu)
    ts, xs = probe_points()
    ch = colehopf_grid(ts, xs, nu, quad_order).u
    return float(np.abs(cn.interpolate(ts, xs) - ch).max())
