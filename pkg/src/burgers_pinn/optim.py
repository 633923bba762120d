"""First-order optimizers on flat parameter vectors and a piecewise-constant LR schedule.

All four share one interface: ``opt.apply(params, grad, lr)`` returns the
updated parameter vector and advances the optimizer's internal state by one
step.  Updates are elementwise numpy expressions, hence deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("adam", "adamax", "rmsprop", "diffgrad")


@dataclass(frozen=True)
class LrSchedule:
    pieces: tuple = ((0, 0.01), (1000, 0.001), (3000, 0.0005))

    def __post_init__(self):
        pieces = tuple((int(e), float(r)) for e, r in self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if not pieces or pieces[0][0] != 0:
            raise ValueError("schedule must start at epoch 0")
        thresholds = [e for e, _ in pieces]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ValueError(f"schedule thresholds must be strictly increasing: {thresholds}")
        if any(r <= 0 for _, r in pieces):
            raise ValueError("learning rates must be positive")

    @classmethod
    def parse(cls, text: str) -> "LrSchedule":
        """Parse ``"0:0.01,1000:0.001"``."""
        pieces = []
        for item in text.split(","):
            epoch, _, rate = item.strip().partition(":")
            if not rate:
                raise ValueError(f"bad schedule entry {item!r}; expected epoch:rate")
            pieces.append((int(epoch), float(rate)))
        return cls(tuple(pieces))

    def format(self) -> str:
        return ",".join(f"{e}:{r!r}" for e, r in self.pieces)

    def lr_at(self, epoch: int) -> float:
        if epoch < 0:
            raise ValueError(f"epoch must be non-negative, got {epoch}")
        rate = self.pieces[0][1]
        for threshold, r in self.pieces:
            if threshold > epoch:
                break
            rate = r
        return rate


def lr_at(schedule: LrSchedule, epoch: int) -> float:
    return schedule.lr_at(epoch)


@dataclass
class OptimizerState:
    kind: str
    m: np.ndarray
    v: np.ndarray
    g_prev: np.ndarray | None = None
    step: int = 0

    @classmethod
    def zeros(cls, kind: str, n: int) -> "OptimizerState":
        if kind not in KINDS:
            raise ValueError(f"unknown optimizer {kind!r}; choose from {KINDS}")
        return cls(kind, np.zeros(n), np.zeros(n), np.zeros(n) if kind == "diffgrad" else None)


@dataclass
class Optimizer:
    """Adam, Adamax, RMSprop or DiffGrad, selected by ``kind``.

    DiffGrad scales the bias-corrected Adam step by the friction
    ``1 / (1 + exp(-|g_prev - g|))``; the previous gradient starts at zero.
    """

    kind: str
    n_params: int
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rho: float = 0.9
    state: OptimizerState = field(init=False)

    def __post_init__(self):
        self.state = OptimizerState.zeros(self.kind, self.n_params)

    def apply(self, params: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != params.shape or grad.shape != self.state.m.shape:
            raise ValueError(f"gradient shape {grad.shape} does not match parameters {params.shape}")
        bad = np.flatnonzero(~np.isfinite(grad))
        if bad.size:
            raise FloatingPointError(f"non-finite gradient entry at index {bad[0]}; step refused")

        s = self.state
        s.step += 1
        t = s.step
        b1, b2, eps = self.beta1, self.beta2, self.eps

        if s.kind == "rmsprop":
            s.v = self.rho * s.v + (1.0 - self.rho) * grad * grad
            return params - lr * grad / (np.sqrt(s.v) + eps)

        s.m = b1 * s.m + (1.0 - b1) * grad
        if s.kind == "adamax":
            s.v = np.maximum(b2 * s.v, np.abs(grad))
            return params - (lr / (1.0 - b1**t)) * s.m / (s.v + eps)

        s.v = b2 * s.v + (1.0 - b2) * grad * grad
        m_hat = s.m / (1.0 - b1**t)
        v_hat = s.v / (1.0 - b2**t)
        step = lr * m_hat / (np.sqrt(v_hat) + eps)
        if s.kind == "diffgrad":
            step = friction(s.g_prev, grad) * step
            s.g_prev = grad.copy()
        return params - step


def friction(g_prev: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Sigmoid of the absolute gradient change; in [0.5, 1), rounding to 1.0 once |change| > ~37."""
    return 1.0 / (1.0 + np.exp(-np.abs(g_prev - g)))


def make(kind: str, n_params: int, **hyper) -> Optimizer:
    return Optimizer(kind, n_params, **hyper)
