"""Fully connected tanh network ``u(t, x)`` over Dual2 payloads.

Parameters live in one flat float64 vector.  Per layer the weight block
``W`` (shape ``(w_in, w_out)``, row-major) comes first, then the bias block
``b``; layers are concatenated in order.  A layer maps ``a -> a @ W + b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import Node, Tape

DEFAULT_WIDTHS = (2, 20, 20, 20, 20, 20, 20, 20, 20, 1)


class NonFiniteError(FloatingPointError):
    """A forward pass produced inf or nan."""

    def __init__(self, message: str, layer: int | None = None):
        super().__init__(message)
        self.layer = layer


@dataclass(frozen=True)
class MLPConfig:
    layer_widths: tuple = DEFAULT_WIDTHS
    activation: str = "tanh"
    input_lb: tuple = (0.0, -1.0)
    input_ub: tuple = (1.0, 1.0)

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2 or widths[0] != 2 or widths[-1] != 1:
            raise ValueError(f"layer widths must start at 2 and end at 1, got {widths}")
        if any(w <= 0 for w in widths):
            raise ValueError(f"layer widths must be positive, got {widths}")
        if self.activation != "tanh":
            raise ValueError(f"only tanh activation is supported, got {self.activation!r}")
        if any(u <= l for l, u in zip(self.input_lb, self.input_ub)):
            raise ValueError("input_ub must exceed input_lb componentwise")

    def layer_slices(self) -> list[tuple[slice, tuple, slice, tuple]]:
        """(weight slice, weight shape, bias slice, bias shape) per layer."""
        out = []
        pos = 0
        for w_in, w_out in zip(self.layer_widths[:-1], self.layer_widths[1:]):
            ws = slice(pos, pos + w_in * w_out)
            pos = ws.stop
            bs = slice(pos, pos + w_out)
            pos = bs.stop
            out.append((ws, (w_in, w_out), bs, (w_out,)))
        return out


def layer_param_counts(config) -> list[int]:
    """Parameters per layer; accepts an :class:`MLPConfig` or a bare width list."""
    w = config.layer_widths if isinstance(config, MLPConfig) else tuple(config)
    return [a * b + b for a, b in zip(w[:-1], w[1:])]


def param_count(config) -> int:
    return sum(layer_param_counts(config))


def init(config: MLPConfig, seed: int) -> np.ndarray:
    """Glorot-uniform weights, zero biases, drawn from ``numpy.random.PCG64(seed)``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    theta = np.zeros(param_count(config))
    for ws, wshape, _, _ in config.layer_slices():
        limit = np.sqrt(6.0 / (wshape[0] + wshape[1]))
        theta[ws] = rng.uniform(-limit, limit, size=wshape).reshape(-1)
    return theta


def check_params(params: np.ndarray, config: MLPConfig) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    n = param_count(config)
    if params.shape != (n,):
        raise ValueError(f"expected {n} parameters, got shape {params.shape}")
    if not np.all(np.isfinite(params)):
        raise NonFiniteError("parameter vector contains non-finite entries")
    return params


def scale_inputs(t, x, config: MLPConfig = MLPConfig()):
    """Map ``(t, x)`` from the domain box onto ``[-1, 1]^2``."""
    (tl, xl), (tu, xu) = config.input_lb, config.input_ub
    t_s = (np.asarray(t, dtype=np.float64) - tl) * (2.0 / (tu - tl)) - 1.0
    x_s = (np.asarray(x, dtype=np.float64) - xl) * (2.0 / (xu - xl)) - 1.0
    return t_s, x_s


def _scale_node(z: Node, lo: float, hi: float) -> Node:
    # same float ops in the same order as scale_inputs
    return (z - lo) * (2.0 / (hi - lo)) - 1.0


def forward(params: np.ndarray, config: MLPConfig, t: Node, x: Node, tape: Tape) -> Node:
    """Record ``u(t, x)`` on ``tape``; ``params`` must be ``tape.params``.

    ``t`` and ``x`` are seeded input nodes of equal batch shape.  The result
    has the same batch shape and carries ``u`` with its t/x derivatives.
    """
    if params is not tape.params and not np.array_equal(params, tape.params):
        raise ValueError("forward: params must match the tape's parameter vector")
    (tl, xl), (tu, xu) = config.input_lb, config.input_ub
    batch = t.shape
    a = tape.apply("stack", _scale_node(t, tl, tu), _scale_node(x, xl, xu))
    layers = config.layer_slices()
    for k, (ws, wshape, bs, bshape) in enumerate(layers):
        z = tape.apply("affine", a, tape.param(ws, wshape), tape.param(bs, bshape))
        a = z if k == len(layers) - 1 else tape.apply("tanh", z)
        if not np.isfinite(a.value.c.sum()):
            raise NonFiniteError(f"non-finite activation in layer {k}", layer=k)
    return tape.apply("reshape", a, shape=batch)


def predict(params: np.ndarray, config: MLPConfig, t, x) -> np.ndarray:
    """Plain float forward pass (values only), for evaluation grids."""
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    t_s, x_s = scale_inputs(t, x, config)
    a = np.stack(np.broadcast_arrays(t_s, x_s), axis=-1)
    shape = a.shape[:-1]
    a = a.reshape(-1, 2)
    layers = config.layer_slices()
    for k, (ws, wshape, bs, _) in enumerate(layers):
        a = a @ params[ws].reshape(wshape)
        a += params[bs]
        if k < len(layers) - 1:
            a = np.tanh(a)
    return a.reshape(shape)


# -- checkpoints -------------------------------------------------------------

CHECKPOINT_FORMAT = "burgers-pinn-checkpoint/1"


def save_checkpoint(path, params: np.ndarray, config: MLPConfig, seed: int, epoch: int, **extra) -> Path:
    """Write a one-line JSON header followed by one ``repr``-formatted float per line."""
    path = Path(path)
    header = {
        "format": CHECKPOINT_FORMAT,
        "layer_widths": list(config.layer_widths),
        "input_lb": list(config.input_lb),
        "input_ub": list(config.input_ub),
        "n_params": int(len(params)),
        "seed": int(seed),
        "epoch": int(epoch),
        **extra,
    }
    lines = [json.dumps(header)] + [repr(float(v)) for v in params]
    path.write_text("\n".join(lines) + "\n")
    return path


def load_checkpoint(path) -> tuple[np.ndarray, MLPConfig, dict]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    if header.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a checkpoint file (format {header.get('format')!r})")
    params = np.array([float(s) for s in lines[1:] if s.strip()])
    config = MLPConfig(tuple(header["layer_widths"]), input_lb=tuple(header["input_lb"]),
                       input_ub=tuple(header["input_ub"]))
    if len(params) != header["n_params"] or len(params) != param_count(config):
        raise ValueError(f"{path}: expected {header['n_params']} values, read {len(params)}")
    return params, config, header
