import json
import math

import numpy as np
import pytest

from burgers_pinn import harness, network, oracle
from burgers_pinn.harness import RunConfig
from burgers_pinn.network import MLPConfig

SMALL = MLPConfig((2, 10, 10, 1))


@pytest.fixture(scope="module")
def reference():
    return oracle.reference_crank_nicolson()


def _cfg(tmp_path, **kw):
    base = dict(epochs=20, n0=20, nb=20, nf=200, grid=(20, 64), out_dir=tmp_path)
    base.update(kw)
    return RunConfig(**base)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(optimizer="sgd")
    with pytest.raises(ValueError):
        RunConfig(nf=0)
    with pytest.raises(ValueError):
        RunConfig(snapshot_times=(0.0, 0.5))
    with pytest.raises(ValueError):
        RunConfig(epochs=-1)


def test_zero_epochs_is_a_no_op(tmp_path):
    cfg = _cfg(tmp_path, epochs=0)
    result = harness.train(cfg, mlp=SMALL)
    assert result.records == []
    assert result.params.tobytes() == network.init(SMALL, 0).tobytes()
    assert harness.read_loss_log(tmp_path / "loss.csv") == []


def test_loss_log_schema_and_sums(tmp_path):
    cfg = _cfg(tmp_path)
    result = harness.train(cfg, mlp=SMALL)
    header, rows = harness.read_csv(tmp_path / "loss.csv")
    assert tuple(header) == harness.LOSS_COLUMNS
    recs = harness.read_loss_log(tmp_path / "loss.csv")
    assert recs == result.records  # repr floats round-trip exactly
    assert [r.epoch for r in recs] == list(range(20))
    for r in recs:
        assert abs(r.total - (r.phi_r + r.phi_0 + r.phi_b)) < 1e-12
        assert r.lr == 0.01
    wall = [r.wall_ms for r in recs]
    assert all(b >= a for a, b in zip(wall, wall[1:]))
    params, mlp, header = network.load_checkpoint(tmp_path / "checkpoint.txt")
    assert params.tobytes() == result.params.tobytes() and mlp == SMALL
    assert header["data_digest"] == result.data.digest()
    assert (tmp_path / "loss.svg").is_file()


def test_training_reduces_loss():
    cfg = RunConfig(epochs=60, n0=20, nb=20, nf=200)
    result = harness.train(cfg, mlp=SMALL)
    assert result.final_loss.total < result.records[0].total


def test_same_seed_bitwise_identical_loss_columns(tmp_path):
    a = harness.train(_cfg(tmp_path / "a", optimizer="adam"), mlp=SMALL)
    b = harness.train(_cfg(tmp_path / "b", optimizer="adam"), mlp=SMALL)
    strip = lambda recs: [r[:-1] for r in recs]
    assert strip(a.records) == strip(b.records)
    _, ra = harness.read_csv(tmp_path / "a" / "loss.csv")
    _, rb = harness.read_csv(tmp_path / "b" / "loss.csv")
    assert [r[:-1] for r in ra] == [r[:-1] for r in rb]


def test_schedule_override_per_optimizer():
    from burgers_pinn.optim import LrSchedule
    cfg = RunConfig(optimizer="rmsprop", epochs=3, n0=5, nb=5, nf=10,
                    schedule_overrides={"rmsprop": LrSchedule(((0, 0.002), (2, 0.001)))})
    result = harness.train(cfg, mlp=SMALL)
    assert [r.lr for r in result.records] == [0.002, 0.002, 0.001]


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_writes_diagnostic(tmp_path):
    theta = network.init(SMALL, 0)
    theta[-11:-1] = 1e308
    with pytest.raises(harness.TrainingDiverged) as info:
        harness.train(_cfg(tmp_path), params=theta, mlp=SMALL)
    assert info.value.epoch == 0
    diag = json.loads((tmp_path / "diagnostic.json").read_text())
    assert diag["epoch"] == 0
    _, _, header = network.load_checkpoint(tmp_path / "checkpoint.txt")
    assert header["diverged"] is True


def test_evaluate_outputs_round_trip(tmp_path, reference):
    cfg = _cfg(tmp_path, epochs=5)
    result = harness.train(cfg, mlp=SMALL)
    report = harness.evaluate(result.params, cfg, reference, mlp=SMALL)

    header, rows = harness.read_csv(tmp_path / "surface.csv")
    assert tuple(header) == harness.SURFACE_COLUMNS and len(rows) == 20 * 64
    u = np.array([float(r[2]) for r in rows]).reshape(20, 64)
    t, x = harness.eval_grid(cfg)
    np.testing.assert_array_equal(u, network.predict(result.params, SMALL, t[:, None], x[None, :]))

    for ts in cfg.snapshot_times:
        header, rows = harness.read_csv(tmp_path / harness.snapshot_name(ts))
        assert tuple(header) == harness.SNAPSHOT_COLUMNS and len(rows) == 64
        arr = np.array(rows, dtype=float)
        np.testing.assert_array_equal(arr[:, 3], np.abs(arr[:, 1] - arr[:, 2]))
        assert (tmp_path / harness.snapshot_name(ts).replace(".csv", ".svg")).is_file()

    saved = json.loads((tmp_path / "error_report.json").read_text())
    assert saved["rel_l2"] == report.rel_l2
    assert saved["steepening"] == report.steepening
    assert (tmp_path / "surface.svg").is_file()


def test_reference_zero_at_origin_in_snapshots(reference):
    cfg = RunConfig(grid=(10, 257))  # odd count puts x = 0 on the grid
    report = harness.evaluate(network.init(SMALL, 0), cfg, reference, mlp=SMALL)
    _, x = harness.eval_grid(cfg)
    assert x[128] == 0.0
    vals = reference.interpolate(cfg.snapshot_times, x)[:, 128]
    assert np.all(np.abs(vals) < 1e-12)
    assert len(report.snapshot_max_slope_ref) == 4


def test_untrained_network_error_is_large(reference):
    report = harness.evaluate(network.init(MLPConfig(), 0), RunConfig(), reference)
    assert report.rel_l2 > 0.5


def test_compare_shares_training_set(tmp_path):
    cfg = _cfg(tmp_path, epochs=3, timing_mode=True)
    rows = harness.compare(cfg)
    assert [r.optimizer for r in rows] == ["adam", "adamax", "rmsprop", "diffgrad"]
    assert len({r.data_digest for r in rows}) == 1
    header, body = harness.read_csv(tmp_path / "compare.csv")
    assert tuple(header) == harness.COMPARE_COLUMNS and len(body) == 4
    meta = json.loads((tmp_path / "compare_meta.json").read_text())
    assert sorted(meta["fastest_first"]) == sorted(r.optimizer for r in rows)
    assert all(r.error is None for r in rows)
    assert (tmp_path / "timing.svg").is_file() and (tmp_path / "loss_compare.svg").is_file()
    for r in rows:
        assert (tmp_path / r.optimizer / "loss.csv").is_file()


def test_compare_records_failures_in_row(tmp_path, monkeypatch):
    real_train = harness.train

    def flaky(config, data=None, **kw):
        if config.optimizer == "adamax":
            raise RuntimeError("boom")
        return real_train(config, data=data, **kw)

    monkeypatch.setattr(harness, "train", flaky)
    rows = harness.compare(_cfg(tmp_path, epochs=1, timing_mode=True))
    bad = [r for r in rows if r.optimizer == "adamax"][0]
    assert "boom" in bad.error and math.isnan(bad.final_loss)
    assert sum(r.error is None for r in rows) == 3


def test_max_slope():
    x = np.linspace(0, 1, 5)
    assert harness.max_slope(x, 3 * x) == pytest.approx(3.0)
