"""Training point sets: initial line, boundary lines and interior collocation points.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``; the draw
order is x0, then xb, then xr, so a given seed reproduces the same sets on
any platform running the same numpy major version.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

T_MIN = 1e-12  # stand-in for the open endpoint t = 0 of (0, 1]


def initial_condition(x):
    return -np.sin(np.pi * np.asarray(x, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Point sets as arrays; each set is ordered as sampled."""

    x0_t: np.ndarray
    x0_x: np.ndarray
    x0_u: np.ndarray
    xb_t: np.ndarray
    xb_x: np.ndarray
    xb_u: np.ndarray
    xr_t: np.ndarray
    xr_x: np.ndarray
    seed: int
    method: str

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.x0_x), len(self.xb_x), len(self.xr_x)

    def digest(self) -> str:
        """SHA-256 over the raw float64 bytes of every set."""
        h = hashlib.sha256()
        for a in (self.x0_t, self.x0_x, self.x0_u, self.xb_t, self.xb_x, self.xb_u, self.xr_t, self.xr_x):
            h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
        return h.hexdigest()

    def rows(self):
        """Yield ``(set, t, x, target)``; collocation rows carry target 0 (residual)."""
        for t, x, u in zip(self.x0_t, self.x0_x, self.x0_u):
            yield "x0", t, x, u
        for t, x, u in zip(self.xb_t, self.xb_x, self.xb_u):
            yield "xb", t, x, u
        for t, x in zip(self.xr_t, self.xr_x):
            yield "xr", t, x, 0.0

    def duplicated(self) -> "TrainingSet":
        """Every point twice, in the same order; handy for invariance checks."""
        d = lambda a: np.concatenate([a, a])
        return TrainingSet(d(self.x0_t), d(self.x0_x), d(self.x0_u), d(self.xb_t), d(self.xb_x),
                           d(self.xb_u), d(self.xr_t), d(self.xr_x), self.seed, self.method)


def _check_sizes(n0, nb, nf):
    for name, n in (("n0", n0), ("nb", nb), ("nf", nf)):
        if int(n) <= 0:
            raise ValueError(f"{name} must be positive, got {n}")


def _sides(nb: int) -> np.ndarray:
    return np.where(np.arange(nb) % 2 == 0, -1.0, 1.0)


def _open_interval(x: np.ndarray) -> np.ndarray:
    # keep interior points off x = -1 (uniform draws live in [-1, 1))
    return np.where(x <= -1.0, np.nextafter(-1.0, 0.0), x)


def _assemble(x0_x, xb_t, xr_t, xr_x, seed, method) -> TrainingSet:
    n0, nb = len(x0_x), len(xb_t)
    return TrainingSet(
        x0_t=np.zeros(n0),
        x0_x=x0_x,
        x0_u=initial_condition(x0_x),
        xb_t=xb_t,
        xb_x=_sides(nb),
        xb_u=np.zeros(nb),
        xr_t=xr_t,
        xr_x=xr_x,
        seed=int(seed),
        method=method,
    )


def sample_uniform(n0: int = 50, nb: int = 50, nf: int = 10000, seed: int = 0) -> TrainingSet:
    _check_sizes(n0, nb, nf)
    rng = np.random.Generator(np.random.PCG64(seed))
    x0_x = rng.uniform(-1.0, 1.0, n0)
    xb_t = rng.uniform(T_MIN, 1.0, nb)
    xr_t = rng.uniform(T_MIN, 1.0, nf)
    xr_x = _open_interval(rng.uniform(-1.0, 1.0, nf))
    return _assemble(x0_x, xb_t, xr_t, xr_x, seed, "uniform")


def _stratified(rng, n: int) -> np.ndarray:
    """One point in each of ``n`` equal strata of [0, 1), strata in random order."""
    return (rng.permutation(n) + rng.uniform(0.0, 1.0, n)) / n


def sample_lhs(n0: int = 50, nb: int = 50, nf: int = 10000, seed: int = 0) -> TrainingSet:
    """Latin hypercube collocation points; stratified initial and boundary points."""
    _check_sizes(n0, nb, nf)
    rng = np.random.Generator(np.random.PCG64(seed))
    x0_x = -1.0 + 2.0 * _stratified(rng, n0)
    xb_t = np.maximum(_stratified(rng, nb), T_MIN)
    xr_t = np.maximum(_stratified(rng, nf), T_MIN)
    xr_x = _open_interval(-1.0 + 2.0 * _stratified(rng, nf))
    return _assemble(x0_x, xb_t, xr_t, xr_x, seed, "lhs")


SAMPLERS = {"uniform": sample_uniform, "lhs": sample_lhs}


def sample(method: str, n0: int, nb: int, nf: int, seed: int) -> TrainingSet:
    try:
        fn = SAMPLERS[method]
    except KeyError:
        raise ValueError(f"unknown sampling method {method!r}; choose from {sorted(SAMPLERS)}") from None
    return fn(n0, nb, nf, seed)
