import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burgers_pinn import autodiff
from burgers_pinn.autodiff import Dual2, Tape
from conftest import assert_matches_fd, central_differences


def test_seeding_and_constants():
    tape = Tape()
    assert tape.input(0.4, "x").value.astuple() == (0.4, 1.0, 0.0, 0.0)
    assert tape.input(0.3, "t").value.astuple() == (0.3, 0.0, 1.0, 0.0)
    assert tape.const(2.0).value.astuple() == (2.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        tape.input(1.0, "y")


def test_tanh_at_zero():
    tape = Tape()
    out = tape.apply("tanh", tape.input(0.0, "x"))
    assert out.value.astuple() == (0.0, 1.0, 0.0, 0.0)


def test_sin_at_half_pi():
    tape = Tape()
    val, dx, dt, dxx = tape.apply("sin", tape.input(math.pi / 2, "x")).value.astuple()
    assert val == 1.0
    assert abs(dx) < 1e-16
    assert dt == 0.0
    assert dxx == -1.0


def test_square_second_derivative():
    tape = Tape()
    x = tape.input(3.0, "x")
    assert (x * x).value.astuple() == (9.0, 6.0, 0.0, 2.0)


def test_product_rule_components():
    tape = Tape()
    x = tape.input(0.7, "x")
    t = tape.input(0.2, "t")
    f = tape.apply("sin", x * 2.0) + t          # sin(2x) + t
    g = tape.apply("exp", x) * t                # t e^x
    h = (f * g).value
    fv, fx, ft, fxx = math.sin(1.4) + 0.2, 2 * math.cos(1.4), 1.0, -4 * math.sin(1.4)
    gv, gx, gt, gxx = 0.2 * math.exp(0.7), 0.2 * math.exp(0.7), math.exp(0.7), 0.2 * math.exp(0.7)
    np.testing.assert_allclose(
        h.astuple(),
        (fv * gv, fx * gv + fv * gx, ft * gv + fv * gt, fxx * gv + 2 * fx * gx + fv * gxx),
        rtol=1e-14,
    )


def test_division_rule():
    tape = Tape()
    x = tape.input(0.5, "x")
    q = (tape.const(1.0) / (x + 1.0)).value     # 1/(1+x)
    v = 1.5
    np.testing.assert_allclose(q.astuple(), (1 / v, -1 / v**2, 0.0, 2 / v**3), rtol=1e-15)


def test_division_by_zero_value():
    tape = Tape()
    with pytest.raises(ZeroDivisionError):
        tape.const(1.0) / tape.input(0.0, "x")


@pytest.mark.parametrize("k", [1.0, math.pi])
def test_second_derivative_of_sine(k):
    xs = np.linspace(-1.0, 1.0, 41)
    tape = Tape()
    u = tape.apply("sin", tape.input(xs, "x") * k)
    np.testing.assert_allclose(u.value.dxx, -k * k * np.sin(k * xs), atol=1e-10, rtol=0)


def test_unsupported_op_rejected():
    tape = Tape()
    with pytest.raises(ValueError, match="unsupported op"):
        tape.apply("cos", tape.input(0.1, "x"))


def test_quadratic_parameter_gradient():
    tape = Tape([3.0])
    p = tape.param(0)
    assert tape.backward(p * p).tolist() == [6.0]


def test_unused_parameter_has_zero_gradient():
    tape = Tape([1.5, -2.0])
    p0 = tape.param(0)
    tape.param(1)
    g = tape.backward(tape.apply("tanh", p0) * 3.0)
    assert g[1] == 0.0
    assert g[0] == pytest.approx(3.0 * (1 - math.tanh(1.5) ** 2), rel=1e-15)


def test_backward_rejects_foreign_or_batched_output():
    a, b = Tape([1.0]), Tape([1.0])
    node = a.param(0)
    with pytest.raises(ValueError):
        b.backward(node)
    batched = a.input(np.zeros(3), "x")
    with pytest.raises(ValueError, match="scalar"):
        a.backward(batched)


def _tiny_net_loss(theta, t, x, grad=False):
    """2-4-1 tanh network; loss mixes every payload component."""
    tape = Tape(theta)
    tn, xn = tape.input(t, "t"), tape.input(x, "x")
    a = tape.apply("stack", tn, xn)
    h = tape.apply("tanh", tape.apply("affine", a, tape.param(slice(0, 8), (2, 4)), tape.param(slice(8, 12), (4,))))
    u = tape.apply("affine", h, tape.param(slice(12, 16), (4, 1)), tape.param(slice(16, 17), (1,)))
    u = tape.apply("reshape", u, shape=tn.shape)
    c = {k: tape.apply("component", u, which=k) for k in autodiff.COMPONENTS}
    expr = c["dt"] + c["val"] * c["dx"] - 0.3 * c["dxx"] + tape.apply("sin", c["val"]) / (c["dx"] * c["dx"] + 1.0)
    out = tape.apply("mean", expr * expr)
    if grad:
        return tape, out
    return float(out.val)


def test_backward_matches_finite_differences_small_network(rng):
    theta = rng.normal(size=17)
    t = rng.uniform(0, 1, 7)
    x = rng.uniform(-1, 1, 7)
    tape, out = _tiny_net_loss(theta, t, x, grad=True)
    grad = tape.backward(out)
    fd = central_differences(lambda th: _tiny_net_loss(th, t, x), theta, h=1e-5)
    assert_matches_fd(grad, fd, rel=1e-5)


def test_backward_is_repeatable_and_leaves_tape_intact(rng):
    theta = rng.normal(size=17)
    t, x = rng.uniform(0, 1, 5), rng.uniform(-1, 1, 5)
    tape, out = _tiny_net_loss(theta, t, x, grad=True)
    n = len(tape)
    g1 = tape.backward(out)
    g2 = tape.backward(out)
    assert len(tape) == n
    assert g1.tobytes() == g2.tobytes()


def test_backward_of_other_components():
    # d/dtheta of (theta * x)'' components: u = theta*x^2 -> u_xx = 2 theta
    tape = Tape([0.7])
    x = tape.input(1.3, "x")
    u = tape.param(0) * (x * x)
    assert tape.backward(u, "dxx").tolist() == [2.0]
    assert tape.backward(u, "dx")[0] == pytest.approx(2 * 1.3)
    assert tape.backward(u, "dt").tolist() == [0.0]


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2**16))
def test_backward_is_linear(a, b, seed):
    r = np.random.default_rng(seed)
    theta = r.normal(size=17)
    t, x = r.uniform(0, 1, 4), r.uniform(-1, 1, 4)
    tape, l1 = _tiny_net_loss(theta, t, x, grad=True)
    l2 = tape.apply("mean", tape.apply("exp", tape.param(slice(0, 17)) * 0.1))
    combo = a * l1 + b * l2
    expected = a * tape.backward(l1) + b * tape.backward(l2)
    np.testing.assert_allclose(tape.backward(combo), expected, rtol=0, atol=1e-12)


def test_broadcasting_reduces_adjoints():
    tape = Tape([2.0])
    p = tape.param(0)
    xs = tape.input(np.array([0.5, 1.0, 1.5]), "x")
    total = tape.apply("sum", p * xs)          # p * (0.5 + 1 + 1.5)
    assert tape.backward(total).tolist() == [3.0]


def test_fused_tanh_matches_generic_rule(rng):
    u = rng.normal(size=(4, 33, 5))
    h = rng.normal(size=(4, 33, 5))
    fast, saved = autodiff._RULES["tanh"].forward(u)
    slow, slow_saved = autodiff.GENERIC_TANH.forward(u)
    np.testing.assert_allclose(fast, slow, rtol=1e-14, atol=1e-15)
    (dfast,) = autodiff._RULES["tanh"].backward(h, [u], saved, {})
    (dslow,) = autodiff.GENERIC_TANH.backward(h, [u], slow_saved, {})
    np.testing.assert_allclose(dfast, dslow, rtol=1e-13, atol=1e-14)


def test_dual2_container():
    d = Dual2(1.0, 2.0, 3.0, 4.0)
    assert (d.val, d.dx, d.dt, d.dxx) == (1.0, 2.0, 3.0, 4.0)
    batched = Dual2(np.arange(3.0))
    assert batched.shape == (3,)
    assert np.all(batched.dx == 0)
