"""Forward-over-reverse automatic differentiation on truncated Taylor scalars.

Every tape node carries a :class:`Dual2` payload ``(val, dx, dt, dxx)``: the
value of some intermediate quantity together with its first derivatives in
the two network inputs and its second derivative in ``x``.  Payloads are
batched: each component may be a numpy array, and all arithmetic acts
elementwise, so one tape evaluates a whole set of collocation points at once.

The reverse sweep propagates Dual2-valued adjoints (one adjoint per payload
component) from a selected real component of a scalar output node back to the
parameter leaves, which gives exact gradients of quantities such as
``mean((u_t + u*u_x - nu*u_xx)**2)`` with respect to every network weight.

Storage layout: a payload is a single array of shape ``(4, *batch)`` whose
leading axis indexes ``val, dx, dt, dxx`` in that order.
"""

from __future__ import annotations

import weakref
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _kernels

COMPONENTS = ("val", "dx", "dt", "dxx")
_COMPONENT_INDEX = {name: k for k, name in enumerate(COMPONENTS)}

# Ops are a closed set. Elementwise arithmetic and the three analytic
# functions define the Taylor algebra; the remaining ones are structural
# (batching, parameter contraction, reduction) and never mix components.
ELEMENTWISE_OPS = ("add", "sub", "mul", "div", "neg", "scale", "tanh", "sin", "exp")
STRUCTURAL_OPS = ("affine", "stack", "reshape", "component", "sum", "mean")
LEAF_KINDS = ("input", "const", "param")


class Dual2:
    """Truncated Taylor scalar ``(val, dx, dt, dxx)``.

    Components may be floats or equally shaped arrays.
    """

    __slots__ = ("c",)

    def __init__(self, val, dx=0.0, dt=0.0, dxx=0.0):
        parts = np.broadcast_arrays(*(np.asarray(p, dtype=np.float64) for p in (val, dx, dt, dxx)))
        self.c = np.stack(parts)

    @classmethod
    def from_array(cls, c: np.ndarray) -> "Dual2":
        obj = cls.__new__(cls)
        obj.c = c
        return obj

    @property
    def val(self) -> np.ndarray:
        return self.c[0]

    @property
    def dx(self) -> np.ndarray:
        return self.c[1]

    @property
    def dt(self) -> np.ndarray:
        return self.c[2]

    @property
    def dxx(self) -> np.ndarray:
        return self.c[3]

    @property
    def shape(self) -> tuple:
        return self.c.shape[1:]

    def astuple(self) -> tuple:
        """Components as plain floats; only valid for unbatched payloads."""
        if self.shape != ():
            raise ValueError(f"astuple needs a scalar payload, got batch shape {self.shape}")
        return tuple(float(v) for v in self.c)

    def __repr__(self) -> str:
        if self.shape == ():
            return "Dual2(val={!r}, dx={!r}, dt={!r}, dxx={!r})".format(*self.astuple())
        return f"Dual2(batch shape {self.shape})"


class Node:
    """A recorded value on a :class:`Tape`.

    Python arithmetic on nodes records the corresponding tape op, so loss
    expressions can be written naturally.
    """

    __slots__ = ("_tape", "id", "op", "parents", "value", "saved", "kwargs")

    def __init__(self, tape, id_, op, parents, value, saved=None, kwargs=None):
        # weak back-reference: a tape and its nodes must not form a cycle, or
        # large payload arrays linger until the cyclic collector happens to run
        self._tape = weakref.ref(tape)
        self.id = id_
        self.op = op
        self.parents = parents
        self.value = value
        self.saved = saved
        self.kwargs = kwargs or {}

    @property
    def tape(self) -> "Tape":
        tape = self._tape()
        if tape is None:
            raise ReferenceError("the tape this node was recorded on no longer exists")
        return tape

    @property
    def val(self) -> np.ndarray:
        return self.value.val

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def __add__(self, other):
        return self.tape.apply("add", self, self.tape.lift(other))

    def __radd__(self, other):
        return self.tape.apply("add", self.tape.lift(other), self)

    def __sub__(self, other):
        return self.tape.apply("sub", self, self.tape.lift(other))

    def __rsub__(self, other):
        return self.tape.apply("sub", self.tape.lift(other), self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.tape.apply("scale", self, factor=float(other))
        return self.tape.apply("mul", self, self.tape.lift(other))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self.tape.apply("scale", self, factor=float(other))
        return self.tape.apply("mul", self.tape.lift(other), self)

    def __truediv__(self, other):
        return self.tape.apply("div", self, self.tape.lift(other))

    def __rtruediv__(self, other):
        return self.tape.apply("div", self.tape.lift(other), self)

    def __neg__(self):
        return self.tape.apply("neg", self)

    def __repr__(self) -> str:
        return f"Node(id={self.id}, op={self.op!r}, value={self.value!r})"


# ---------------------------------------------------------------------------
# Taylor-arithmetic rules.  Each forward returns (payload array, saved);
# each backward maps the output adjoint to one adjoint per parent, shaped
# like that parent's payload array.


def _align(a: np.ndarray, ndim: int) -> np.ndarray:
    extra = ndim - (a.ndim - 1)
    if extra == 0:
        return a
    return a.reshape((4,) + (1,) * extra + a.shape[1:])


def _reduce_to(adj: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast adjoint back down to payload ``shape`` (incl. leading 4)."""
    if adj.shape == shape:
        return adj
    lead = adj.ndim - len(shape)
    if lead:
        adj = adj.sum(axis=tuple(range(1, 1 + lead)))
    axes = tuple(i for i in range(1, len(shape)) if shape[i] == 1 and adj.shape[i] != 1)
    if axes:
        adj = adj.sum(axis=axes, keepdims=True)
    return adj.reshape(shape)


def _binary_operands(a: np.ndarray, b: np.ndarray):
    nd = max(a.ndim, b.ndim) - 1
    return _align(a, nd), _align(b, nd)


def _fw_add(a, b):
    a, b = _binary_operands(a, b)
    return a + b, None


def _bw_add(h, parents, saved, kw):
    return _reduce_to(h, parents[0].shape), _reduce_to(h, parents[1].shape)


def _fw_sub(a, b):
    a, b = _binary_operands(a, b)
    return a - b, None


def _bw_sub(h, parents, saved, kw):
    return _reduce_to(h, parents[0].shape), _reduce_to(-h, parents[1].shape)


def _mul_forward(f, g):
    f, g = _binary_operands(f, g)
    out = np.empty(np.broadcast_shapes(f.shape, g.shape))
    out[0] = f[0] * g[0]
    out[1:3] = f[1:3] * g[0] + f[0] * g[1:3]
    out[3] = f[3] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[3]
    return out


def _mul_backward(h, f, g):
    """Adjoints of both factors; ``f`` and ``g`` already aligned."""
    shape = h.shape
    df = np.empty(shape)
    dg = np.empty(shape)
    df[0] = h[0] * g[0] + h[1] * g[1] + h[2] * g[2] + h[3] * g[3]
    df[1] = h[1] * g[0] + 2.0 * h[3] * g[1]
    df[2] = h[2] * g[0]
    df[3] = h[3] * g[0]
    dg[0] = h[0] * f[0] + h[1] * f[1] + h[2] * f[2] + h[3] * f[3]
    dg[1] = h[1] * f[0] + 2.0 * h[3] * f[1]
    dg[2] = h[2] * f[0]
    dg[3] = h[3] * f[0]
    return df, dg


def _fw_mul(a, b):
    return _mul_forward(a, b), None


def _bw_mul(h, parents, saved, kw):
    a, b = (p.shape for p in parents)
    f, g = _binary_operands(parents[0], parents[1])
    df, dg = _mul_backward(h, f, g)
    return _reduce_to(df, a), _reduce_to(dg, b)


def _unary_forward(u, f0, d1, d2):
    # (f, f'*u_x, f'*u_t, f''*u_x**2 + f'*u_xx), written with out= buffers
    # because fresh temporaries dominate the cost on large batches
    if u.ndim == 1:
        return _unary_forward(u[:, None], f0, d1, d2)[:, 0]
    out = np.empty(u.shape)
    out[0] = f0
    np.multiply(u[1:3], d1, out=out[1:3])
    tmp = np.multiply(u[1], u[1])
    tmp *= d2
    np.multiply(u[3], d1, out=out[3])
    out[3] += tmp
    return out


def _unary_backward(h, u, d1, d2, d3):
    if u.ndim == 1:
        return _unary_backward(h[:, None], u[:, None], d1, d2, d3)[:, 0]
    du = np.empty(u.shape)
    u1 = u[1]
    np.multiply(h[2:4], d1, out=du[2:4])
    # dx slot: h1*f1 + 2*h3*f2*u_x
    a = np.multiply(h[3], d2)
    a *= u1
    a *= 2.0
    np.multiply(h[1], d1, out=du[1])
    du[1] += a
    # val slot: h0*f1 + (h1*u_x + h2*u_t)*f2 + h3*(f3*u_x**2 + f2*u_xx)
    b = np.multiply(h[1], u1)
    c = np.multiply(h[2], u[2])
    b += c
    b *= d2
    np.multiply(h[0], d1, out=du[0])
    du[0] += b
    np.multiply(u1, u1, out=c)
    c *= d3
    np.multiply(d2, u[3], out=b)
    c += b
    c *= h[3]
    du[0] += c
    return du


def _tanh_derivs(z):
    s = np.tanh(z)
    d1 = np.multiply(s, s)
    np.subtract(1.0, d1, out=d1)
    d2 = np.multiply(s, d1)
    d2 *= -2.0
    return s, d1, d2


def _tanh_third(s, d1, d2):
    d3 = np.multiply(s, s)
    d3 *= 6.0
    d3 -= 2.0
    d3 *= d1
    return d3


def _sin_derivs(z):
    s = np.sin(z)
    c = np.cos(z)
    return s, c, -s


def _sin_third(s, d1, d2):
    return -d1


def _exp_derivs(z):
    e = np.exp(z)
    return e, e, e


def _exp_third(s, d1, d2):
    return s


def _make_unary(derivs: Callable, third: Callable):
    def forward(u):
        f0, d1, d2 = derivs(u[0])
        return _unary_forward(u, f0, d1, d2), (f0, d1, d2)

    def backward(h, parents, saved, kw):
        f0, d1, d2 = saved
        return (_unary_backward(h, parents[0], d1, d2, third(f0, d1, d2)),)

    return forward, backward


def _fw_tanh(u):
    out, s = _kernels.fused_tanh_forward(np.ascontiguousarray(u))
    return out, s


def _bw_tanh(h, parents, saved, kw):
    return (_kernels.fused_tanh_backward(h, np.ascontiguousarray(parents[0]), saved),)


def _fw_div(a, b):
    g0 = b[0]
    if np.any(g0 == 0.0):
        raise ZeroDivisionError("Dual2 division by a zero value")
    r = 1.0 / g0
    d1 = -r * r
    d2 = -2.0 * r * d1
    q = _unary_forward(b, r, d1, d2)
    return _mul_forward(a, q), (q, r, d1, d2)


def _bw_div(h, parents, saved, kw):
    q, r, d1, d2 = saved
    f, qa = _binary_operands(parents[0], q)
    df, dq = _mul_backward(h, f, qa)
    dq = _reduce_to(dq, q.shape)
    d3 = -3.0 * r * d2
    db = _unary_backward(dq, parents[1], d1, d2, d3)
    return _reduce_to(df, parents[0].shape), db


def _fw_neg(a):
    return -a, None


def _bw_neg(h, parents, saved, kw):
    return (-h,)


def _fw_scale(a, factor):
    return factor * a, None


def _bw_scale(h, parents, saved, kw):
    return (kw["factor"] * h,)


def _fw_affine(a, w, b):
    w_in, w_out = w.shape[1:]
    if a.shape[-1] != w_in:
        raise ValueError(f"affine: input width {a.shape[-1]} does not match weight rows {w_in}")
    z = (a.reshape(-1, w_in) @ w[0]).reshape(a.shape[:-1] + (w_out,))
    z[0] += b[0]
    return z, None


def _bw_affine(h, parents, saved, kw):
    a, w, b = parents
    w_in, w_out = w.shape[1:]
    hz = h.reshape(-1, w_out)
    da = (hz @ w[0].T).reshape(a.shape)
    dw = np.zeros(w.shape)
    dw[0] = a.reshape(-1, w_in).T @ hz
    db = np.zeros(b.shape)
    db[0] = h[0].reshape(-1, w_out).sum(axis=0)
    return da, dw, db


def _fw_stack(*parts):
    return np.stack(parts, axis=-1), None


def _bw_stack(h, parents, saved, kw):
    return tuple(h[..., k] for k in range(h.shape[-1]))


def _fw_reshape(a, shape):
    return a.reshape((4,) + tuple(shape)), None


def _bw_reshape(h, parents, saved, kw):
    return (h.reshape(parents[0].shape),)


def _fw_component(a, which):
    out = np.zeros(a.shape)
    out[0] = a[_COMPONENT_INDEX[which]]
    return out, None


def _bw_component(h, parents, saved, kw):
    da = np.zeros(parents[0].shape)
    da[_COMPONENT_INDEX[kw["which"]]] = h[0]
    return (da,)


def _fw_sum(a):
    return a.reshape(4, -1).sum(axis=1), None


def _bw_sum(h, parents, saved, kw):
    shape = parents[0].shape
    return (np.broadcast_to(h.reshape((4,) + (1,) * (len(shape) - 1)), shape),)


def _fw_mean(a):
    n = a[0].size
    return a.reshape(4, -1).sum(axis=1) / n, None


def _bw_mean(h, parents, saved, kw):
    shape = parents[0].shape
    n = parents[0][0].size
    return (np.broadcast_to((h / n).reshape((4,) + (1,) * (len(shape) - 1)), shape),)


class _Rule(NamedTuple):
    forward: Callable
    backward: Callable


_RULES = {
    "add": _Rule(_fw_add, _bw_add),
    "sub": _Rule(_fw_sub, _bw_sub),
    "mul": _Rule(_fw_mul, _bw_mul),
    "div": _Rule(_fw_div, _bw_div),
    "neg": _Rule(_fw_neg, _bw_neg),
    "scale": _Rule(_fw_scale, _bw_scale),
    "tanh": _Rule(_fw_tanh, _bw_tanh),
    "sin": _Rule(*_make_unary(_sin_derivs, _sin_third)),
    "exp": _Rule(*_make_unary(_exp_derivs, _exp_third)),
    "affine": _Rule(_fw_affine, _bw_affine),
    "stack": _Rule(_fw_stack, _bw_stack),
    "reshape": _Rule(_fw_reshape, _bw_reshape),
    "component": _Rule(_fw_component, _bw_component),
    "sum": _Rule(_fw_sum, _bw_sum),
    "mean": _Rule(_fw_mean, _bw_mean),
}


# same rule through the generic numpy path; the fused kernels are tested against it
GENERIC_TANH = _Rule(*_make_unary(_tanh_derivs, _tanh_third))


class Tape:
    """Single-writer record of a computation over :class:`Dual2` payloads.

    ``params`` is the flat parameter vector; :meth:`param` creates leaves
    that view slices of it, and :meth:`backward` returns gradients with the
    same length.  The tape is append-only, so nodes are always in
    topological order.
    """

    def __init__(self, params: np.ndarray | Sequence[float] = ()):
        self.params = np.asarray(params, dtype=np.float64)
        self.nodes: list[Node] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def _push(self, op, parents, value, saved=None, kwargs=None) -> Node:
        node = Node(self, len(self.nodes), op, parents, value, saved, kwargs)
        self.nodes.append(node)
        return node

    # -- leaves --------------------------------------------------------

    def input(self, value, which: str) -> Node:
        """Seed an independent variable: ``x -> (x, 1, 0, 0)``, ``t -> (t, 0, 1, 0)``."""
        if which == "x":
            payload = Dual2(value, 1.0, 0.0, 0.0)
        elif which == "t":
            payload = Dual2(value, 0.0, 1.0, 0.0)
        else:
            raise ValueError(f"input must be seeded as 'x' or 't', not {which!r}")
        return self._push("input", (), payload, kwargs={"which": which})

    def const(self, value) -> Node:
        return self._push("const", (), Dual2(value))

    def param(self, index, shape: tuple | None = None) -> Node:
        """Leaf viewing ``params[index]``; ``index`` is an int or a contiguous slice."""
        if isinstance(index, (int, np.integer)):
            index = slice(int(index), int(index) + 1)
            shape = () if shape is None else shape
        block = self.params[index]
        if shape is not None:
            block = block.reshape(shape)
        payload = Dual2.from_array(np.zeros((4,) + block.shape))
        payload.c[0] = block
        return self._push("param", (), payload, kwargs={"index": index})

    def lift(self, value) -> Node:
        if isinstance(value, Node):
            if value._tape() is not self:
                raise ValueError("node belongs to a different tape")
            return value
        return self.const(value)

    # -- recorded ops --------------------------------------------------

    def apply(self, op: str, *args: Node, **kwargs) -> Node:
        rule = _RULES.get(op)
        if rule is None:
            raise ValueError(f"unsupported op {op!r}; expected one of {sorted(_RULES)}")
        for a in args:
            if not isinstance(a, Node) or a._tape() is not self:
                raise ValueError(f"{op}: every argument must be a node on this tape")
        if op == "affine" and any(a.op not in ("param", "const") for a in args[1:]):
            raise ValueError("affine: weight and bias must be parameter or constant leaves")
        out, saved = rule.forward(*(a.value.c for a in args), **kwargs)
        return self._push(op, tuple(args), Dual2.from_array(out), saved, kwargs)

    # -- reverse sweep -------------------------------------------------

    def backward(self, output: Node, component: str = "val") -> np.ndarray:
        """Gradient of ``output.<component>`` with respect to ``self.params``.

        ``output`` must be an unbatched node of this tape.  The tape itself
        is left untouched, so repeated calls give identical results.
        """
        if not isinstance(output, Node) or output._tape() is not self or output.id >= len(self.nodes) \
                or self.nodes[output.id] is not output:
            raise ValueError("backward: output node is not recorded on this tape")
        if output.shape != ():
            raise ValueError(f"backward: output must be a scalar, got batch shape {output.shape}")
        if component not in _COMPONENT_INDEX:
            raise ValueError(f"unknown component {component!r}")

        grad = np.zeros(self.params.shape)
        adjoints: list[np.ndarray | None] = [None] * (output.id + 1)
        seed = np.zeros(4)
        seed[_COMPONENT_INDEX[component]] = 1.0
        adjoints[output.id] = seed

        for node in reversed(self.nodes[: output.id + 1]):
            adj = adjoints[node.id]
            if adj is None:
                continue
            adjoints[node.id] = None
            if node.op == "param":
                grad[node.kwargs["index"]] += adj[0].reshape(-1)
                continue
            if not node.parents:
                continue
            rule = _RULES[node.op]
            parent_adj = rule.backward(adj, [p.value.c for p in node.parents], node.saved, node.kwargs)
            for parent, pa in zip(node.parents, parent_adj):
                prev = adjoints[parent.id]
                adjoints[parent.id] = pa if prev is None else prev + pa
        return grad
