import sys

import numpy as np
import pytest


def central_differences(f, theta, h=1e-5):
    """Gradient of scalar ``f`` by central differences, one coordinate at a time."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.empty_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        grad[i] = (f(theta + e) - f(theta - e)) / (2.0 * h)
    return grad


def assert_matches_fd(grad, fd, rel=1e-5, abs_floor=1e-8):
    """Relative check where |grad| >= abs_floor, absolute check below it."""
    grad = np.asarray(grad)
    fd = np.asarray(fd)
    big = np.abs(grad) >= abs_floor
    rel_err = np.abs(grad[big] - fd[big]) / np.abs(grad[big])
    assert rel_err.size == 0 or rel_err.max() < rel, f"max relative error {rel_err.max():.3e}"
    assert np.all(np.abs(grad[~big] - fd[~big]) < abs_floor)
    return float(rel_err.max()) if rel_err.size else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(results):
        parts = results[n]
        ok = all(p[1] for p in parts)
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {module.TITLES[n]}")
        for label, passed, detail in parts:
            tr.write_line(f"    {'ok  ' if passed else 'FAIL'} {label}: {detail}")
