import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burgers_pinn import network
from burgers_pinn.autodiff import Tape
from burgers_pinn.network import MLPConfig


def test_default_parameter_count():
    cfg = MLPConfig()
    assert network.param_count(cfg) == 3021
    assert network.layer_param_counts(cfg) == [60] + [420] * 7 + [21]


def test_minimal_width_list_count():
    assert network.param_count([1, 1]) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        MLPConfig((3, 20, 1))
    with pytest.raises(ValueError):
        MLPConfig(activation="relu")


def test_init_deterministic_with_zero_biases():
    cfg = MLPConfig()
    a, b = network.init(cfg, 7), network.init(cfg, 7)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, network.init(cfg, 8))
    for ws, wshape, bs, _ in cfg.layer_slices():
        assert np.all(a[bs] == 0.0)
        limit = math.sqrt(6.0 / sum(wshape))
        assert np.all(np.abs(a[ws]) <= limit)


def test_init_weight_mean_near_zero():
    cfg = MLPConfig()
    theta = network.init(cfg, 0)
    weights = np.concatenate([theta[ws] for ws, *_ in cfg.layer_slices()])
    assert abs(weights.mean()) < 0.02


@pytest.mark.parametrize("t,x,expected", [((0.0), -1.0, (-1.0, -1.0)), (1.0, 1.0, (1.0, 1.0)), (0.5, 0.0, (0.0, 0.0))])
def test_scale_inputs_corners(t, x, expected):
    assert tuple(float(v) for v in network.scale_inputs(t, x)) == expected


def _forward(theta, cfg, t, x):
    tape = Tape(theta)
    return network.forward(theta, cfg, tape.input(t, "t"), tape.input(x, "x"), tape).value


def test_constant_network():
    cfg = MLPConfig((2, 5, 5, 1))
    theta = np.zeros(network.param_count(cfg))
    theta[-1] = 0.37
    u = _forward(theta, cfg, np.linspace(0, 1, 9), np.linspace(-1, 1, 9))
    assert np.all(u.val == 0.37)
    assert np.all(u.dx == 0) and np.all(u.dt == 0) and np.all(u.dxx == 0)


def test_hand_computed_two_two_one():
    # layout: W1 (2x2 row-major), b1, W2 (2x1), b2
    cfg = MLPConfig((2, 2, 1))
    w11, w12, w21, w22 = 0.3, -0.5, 0.8, 0.1
    b1, b2 = (0.05, -0.2)
    v1, v2, c = 1.2, -0.7, 0.4
    theta = np.array([w11, w12, w21, w22, b1, b2, v1, v2, c])
    t, x = 0.25, 0.6
    ts, xs = 2 * t - 1, x
    z1 = ts * w11 + xs * w21 + b1
    z2 = ts * w12 + xs * w22 + b2
    s1, s2 = math.tanh(z1), math.tanh(z2)
    d1, d2 = 1 - s1 * s1, 1 - s2 * s2
    u = v1 * s1 + v2 * s2 + c
    u_x = v1 * d1 * w21 + v2 * d2 * w22
    u_t = 2 * (v1 * d1 * w11 + v2 * d2 * w12)
    u_xx = v1 * (-2 * s1 * d1) * w21**2 + v2 * (-2 * s2 * d2) * w22**2
    out = _forward(theta, cfg, t, x)
    np.testing.assert_allclose([out.val, out.dx, out.dt, out.dxx], [u, u_x, u_t, u_xx], rtol=0, atol=1e-12)


def test_plain_forward_bitwise_equals_dual_value(rng):
    cfg = MLPConfig()
    theta = network.init(cfg, 3)
    t, x = rng.uniform(0, 1, 500), rng.uniform(-1, 1, 500)
    dual = _forward(theta, cfg, t, x).val
    assert dual.tobytes() == network.predict(theta, cfg, t, x).tobytes()


def test_input_derivatives_match_finite_differences(rng):
    cfg = MLPConfig((2, 8, 8, 1))
    theta = network.init(cfg, 1) + 0.2 * rng.normal(size=network.param_count(cfg))
    t, x = rng.uniform(0.1, 0.9, 6), rng.uniform(-0.9, 0.9, 6)
    out = _forward(theta, cfg, t, x)
    f = lambda tt, xx: network.predict(theta, cfg, tt, xx)
    h = 1e-5
    np.testing.assert_allclose(out.dx, (f(t, x + h) - f(t, x - h)) / (2 * h), atol=1e-8)
    np.testing.assert_allclose(out.dt, (f(t + h, x) - f(t - h, x)) / (2 * h), atol=1e-8)
    h = 1e-4
    np.testing.assert_allclose(out.dxx, (f(t, x + h) - 2 * f(t, x) + f(t, x - h)) / h**2, atol=1e-5)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_forward_reports_layer():
    cfg = MLPConfig((2, 3, 1))
    theta = np.ones(network.param_count(cfg))
    theta[-4:-1] = 1e308  # output weights overflow
    with pytest.raises(network.NonFiniteError) as info:
        _forward(theta, cfg, np.array([0.5]), np.array([0.5]))
    assert info.value.layer == 1


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(0.1, 50.0), seed=st.integers(0, 1000))
def test_output_finite_for_finite_params(scale, seed):
    cfg = MLPConfig((2, 6, 6, 1))
    theta = scale * np.random.default_rng(seed).normal(size=network.param_count(cfg))
    u = network.predict(theta, cfg, np.linspace(0, 1, 11), np.linspace(-1, 1, 11))
    assert np.all(np.isfinite(u))


def test_checkpoint_round_trip(tmp_path, rng):
    cfg = MLPConfig()
    theta = rng.normal(size=3021) * np.exp(rng.uniform(-30, 30, 3021))
    path = network.save_checkpoint(tmp_path / "ck.txt", theta, cfg, seed=5, epoch=42)
    loaded, cfg2, header = network.load_checkpoint(path)
    assert loaded.tobytes() == theta.tobytes()
    assert cfg2 == cfg
    assert header["epoch"] == 42 and header["seed"] == 5


def test_missing_checkpoint(tmp_path):
    with pytest.raises(FileNotFoundError):
        network.load_checkpoint(tmp_path / "nope.txt")
