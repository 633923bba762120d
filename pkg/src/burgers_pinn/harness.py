"""Training, evaluation and optimizer comparison runs, with their CSV/SVG outputs.

Output files (all CSVs carry a header row):

``loss.csv``          epoch,total,phi_r,phi_0,phi_b,lr,wall_ms
``checkpoint.txt``    see :func:`burgers_pinn.network.save_checkpoint`
``surface.csv``       t,x,u_pred on the evaluation grid
``snapshot_t<T>.csv`` x,u_pred,u_ref,abs_err at each snapshot time
``error_report.json`` relative L2 error and per-snapshot diagnostics
``compare.csv``       optimizer,final_loss,rel_l2,seconds,epochs
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import network, optim, oracle, physics, sampler, svg
from .network import MLPConfig
from .optim import LrSchedule
from .physics import BurgersProblem, LossBreakdown
from .sampler import TrainingSet

log = logging.getLogger(__name__)

LOSS_COLUMNS = ("epoch", "total", "phi_r", "phi_0", "phi_b", "lr", "wall_ms")
SNAPSHOT_COLUMNS = ("x", "u_pred", "u_ref", "abs_err")
SURFACE_COLUMNS = ("t", "x", "u_pred")
COMPARE_COLUMNS = ("optimizer", "final_loss", "rel_l2", "seconds", "epochs")


@dataclass(frozen=True)
class RunConfig:
    optimizer: str = "diffgrad"
    epochs: int = 5000
    seed: int = 0
    n0: int = 50
    nb: int = 50
    nf: int = 10000
    sampling: str = "uniform"
    schedule: LrSchedule = LrSchedule()
    schedule_overrides: dict = field(default_factory=dict)  # optimizer kind -> LrSchedule
    snapshot_times: tuple = oracle.SNAPSHOT_TIMES
    grid: tuple = (100, 256)  # (n_t, n_x)
    out_dir: Path | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rho: float = 0.9
    timing_mode: bool = False
    plots: bool = True

    def __post_init__(self):
        if self.optimizer not in optim.KINDS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; choose from {optim.KINDS}")
        if self.sampling not in sampler.SAMPLERS:
            raise ValueError(f"unknown sampling method {self.sampling!r}")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if min(self.n0, self.nb, self.nf) <= 0:
            raise ValueError("point counts must be positive")
        if any(not 0.0 < t <= 1.0 for t in self.snapshot_times):
            raise ValueError(f"snapshot times must lie in (0, 1], got {self.snapshot_times}")
        if len(self.grid) != 2 or min(self.grid) < 2:
            raise ValueError(f"evaluation grid needs at least 2x2 points, got {self.grid}")

    def schedule_for(self, kind: str) -> LrSchedule:
        return self.schedule_overrides.get(kind, self.schedule)

    def hyper(self) -> dict:
        return {"beta1": self.beta1, "beta2": self.beta2, "eps": self.eps, "rho": self.rho}


class EpochRecord(NamedTuple):
    epoch: int
    total: float
    phi_r: float
    phi_0: float
    phi_b: float
    lr: float
    wall_ms: float


@dataclass
class TrainResult:
    params: np.ndarray
    records: list
    data: TrainingSet
    final_loss: LossBreakdown
    seconds: float


class TrainingDiverged(RuntimeError):
    """Loss went non-finite; carries the last finite parameters and the log so far."""

    def __init__(self, message, params, records, epoch):
        super().__init__(message)
        self.params = params
        self.records = records
        self.epoch = epoch


def sample_data(config: RunConfig) -> TrainingSet:
    return sampler.sample(config.sampling, config.n0, config.nb, config.nf, config.seed)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def read_loss_log(path) -> list[EpochRecord]:
    header, rows = read_csv(path)
    if tuple(header) != LOSS_COLUMNS:
        raise ValueError(f"{path}: unexpected header {header}")
    return [EpochRecord(int(r[0]), *(float(v) for v in r[1:])) for r in rows]


def train(config: RunConfig, data: TrainingSet | None = None, params: np.ndarray | None = None,
          problem: BurgersProblem = BurgersProblem(), mlp: MLPConfig = MLPConfig()) -> TrainResult:
    """Full-batch training; writes ``loss.csv`` and ``checkpoint.txt`` when ``out_dir`` is set.

    Record ``k`` holds the loss at the parameters *before* the k-th update and
    the learning rate that update used; ``wall_ms`` is cumulative loop time.
    """
    data = sample_data(config) if data is None else data
    params = network.init(mlp, config.seed) if params is None else np.array(params, dtype=np.float64)
    opt = optim.make(config.optimizer, len(params), **config.hyper())
    schedule = config.schedule_for(config.optimizer)
    out = Path(config.out_dir) if config.out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    records: list[EpochRecord] = []
    elapsed = 0.0
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        try:
            breakdown, grad = physics.loss_gradient(params, mlp, problem, data)
        except network.NonFiniteError as exc:
            _abort(out, config, mlp, params, records, epoch, None, str(exc))
        if not np.isfinite(breakdown.total) or not np.all(np.isfinite(grad)):
            _abort(out, config, mlp, params, records, epoch, breakdown, "non-finite loss or gradient")
        lr = schedule.lr_at(epoch)
        params = opt.apply(params, grad, lr)
        elapsed += time.perf_counter() - t0
        records.append(EpochRecord(epoch, *breakdown, lr, elapsed * 1e3))
        if epoch % 500 == 0:
            log.info("%s epoch %d loss %.3e", config.optimizer, epoch, breakdown.total)

    final = physics.loss(params, mlp, problem, data)
    result = TrainResult(params, records, data, final, elapsed)
    if out is not None:
        write_training_outputs(out, config, mlp, result)
    return result


def _abort(out, config, mlp, params, records, epoch, breakdown, reason):
    loss = None if breakdown is None else list(breakdown)
    if out is not None:
        network.save_checkpoint(out / "checkpoint.txt", params, mlp, config.seed, epoch,
                                optimizer=config.optimizer, diverged=True)
        write_csv(out / "loss.csv", LOSS_COLUMNS, records)
        (out / "diagnostic.json").write_text(json.dumps(
            {"epoch": epoch, "loss": loss, "reason": reason}, indent=2))
    raise TrainingDiverged(f"training diverged at epoch {epoch}: {reason}", params, records, epoch)


def write_training_outputs(out: Path, config: RunConfig, mlp: MLPConfig, result: TrainResult):
    write_csv(out / "loss.csv", LOSS_COLUMNS, result.records)
    network.save_checkpoint(out / "checkpoint.txt", result.params, mlp, config.seed, config.epochs,
                            optimizer=config.optimizer, sampling=config.sampling,
                            data_digest=result.data.digest())
    if config.plots and result.records:
        epochs = [r.epoch for r in result.records]
        svg.line_plot(out / "loss.svg",
                      [(epochs, [getattr(r, k) for r in result.records], k)
                       for k in ("total", "phi_r", "phi_0", "phi_b")],
                      title=f"Training loss ({config.optimizer})", xlabel="epoch", ylabel="loss", logy=True)


# -- evaluation --------------------------------------------------------------


@dataclass
class EvalReport:
    rel_l2: float
    snapshot_times: list
    snapshot_max_abs_err: list
    snapshot_max_slope_pred: list
    snapshot_max_slope_ref: list
    ic_max_abs_err: float
    grid: tuple

    @property
    def steepening(self) -> bool:
        """Whether the predicted max |du/dx| grows strictly with snapshot time."""
        s = self.snapshot_max_slope_pred
        return all(b > a for a, b in zip(s, s[1:]))


def eval_grid(config: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    nt, nx = config.grid
    return np.linspace(0.0, 1.0, nt), np.linspace(-1.0, 1.0, nx)


def max_slope(x: np.ndarray, u: np.ndarray) -> float:
    """Largest finite-difference |du/dx| along a profile."""
    return float(np.max(np.abs(np.diff(u) / np.diff(x))))


def evaluate(params, config: RunConfig, reference: oracle.ReferenceGrid | None = None,
             mlp: MLPConfig = MLPConfig()) -> EvalReport:
    """Predict on the evaluation grid and compare with the finite-difference reference."""
    params = network.check_params(params, mlp)
    reference = oracle.reference_crank_nicolson() if reference is None else reference
    t_grid, x_grid = eval_grid(config)
    u_pred = network.predict(params, mlp, t_grid[:, None], x_grid[None, :])
    u_ref = reference.interpolate(t_grid, x_grid)
    rel = oracle.relative_l2_error(u_pred, u_ref)

    snaps = np.asarray(config.snapshot_times, dtype=np.float64)
    snap_pred = network.predict(params, mlp, snaps[:, None], x_grid[None, :])
    snap_ref = reference.interpolate(snaps, x_grid)
    report = EvalReport(
        rel_l2=rel,
        snapshot_times=[float(t) for t in snaps],
        snapshot_max_abs_err=[float(np.abs(p - r).max()) for p, r in zip(snap_pred, snap_ref)],
        snapshot_max_slope_pred=[max_slope(x_grid, p) for p in snap_pred],
        snapshot_max_slope_ref=[max_slope(x_grid, r) for r in snap_ref],
        ic_max_abs_err=float(np.abs(u_pred[0] - sampler.initial_condition(x_grid)).max()),
        grid=tuple(config.grid),
    )

    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        tt, xx = np.meshgrid(t_grid, x_grid, indexing="ij")
        write_csv(out / "surface.csv", SURFACE_COLUMNS, zip(tt.ravel(), xx.ravel(), u_pred.ravel()))
        for t, p, r in zip(snaps, snap_pred, snap_ref):
            write_csv(out / snapshot_name(t), SNAPSHOT_COLUMNS, zip(x_grid, p, r, np.abs(p - r)))
            if config.plots:
                svg.line_plot(out / snapshot_name(t).replace(".csv", ".svg"),
                              [(x_grid, r, "reference"), (x_grid, p, "PINN")],
                              title=f"u(t={t:g}, x)", xlabel="x", ylabel="u")
        if config.plots:
            svg.heatmap(out / "surface.svg", t_grid, x_grid, u_pred, title="PINN solution u(t, x)")
        (out / "error_report.json").write_text(json.dumps(asdict(report) | {"steepening": report.steepening},
                                                          indent=2))
    return report


def snapshot_name(t: float) -> str:
    return f"snapshot_t{t:g}.csv"


# -- comparison --------------------------------------------------------------


@dataclass
class CompareRow:
    optimizer: str
    final_loss: float
    rel_l2: float
    seconds: float
    epochs: int
    data_digest: str
    error: str | None = None
    report: EvalReport | None = None

    def csv_row(self):
        return (self.optimizer, self.final_loss, self.rel_l2, self.seconds, self.epochs)


def _compare_one(kind: str, config: RunConfig, data: TrainingSet, reference) -> CompareRow:
    sub = replace(config, optimizer=kind,
                  out_dir=None if config.out_dir is None else Path(config.out_dir) / kind)
    try:
        result = train(sub, data=data)
        report = evaluate(result.params, sub, reference)
    except Exception as exc:  # recorded in-row; the other optimizers still run
        log.exception("%s run failed", kind)
        return CompareRow(kind, float("nan"), float("nan"), float("nan"), config.epochs, data.digest(),
                          error=f"{type(exc).__name__}: {exc}")
    return CompareRow(kind, result.final_loss.total, report.rel_l2, result.seconds, config.epochs,
                      data.digest(), report=report)


def compare(config: RunConfig, kinds=optim.KINDS) -> list[CompareRow]:
    """Train every optimizer on one shared training set and tabulate the outcome.

    Runs go sequentially in timing mode (fair wall-clock numbers) or when
    only one CPU is available; otherwise they run in worker processes.
    """
    data = sample_data(config)
    reference = oracle.reference_crank_nicolson()
    workers = 1 if config.timing_mode else min(len(kinds), os.cpu_count() or 1)
    if workers == 1:
        rows = [_compare_one(k, config, data, reference) for k in kinds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_compare_one, k, config, data, reference) for k in kinds]
            rows = [f.result() for f in futures]

    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "compare.csv", COMPARE_COLUMNS, (r.csv_row() for r in rows))
        meta = {
            "data_digest": data.digest(),
            "timing_mode": config.timing_mode,
            "workers": workers,
            "rows": [{"optimizer": r.optimizer, "data_digest": r.data_digest, "error": r.error} for r in rows],
            "fastest_first": [r.optimizer for r in sorted(rows, key=lambda r: (np.isnan(r.seconds), r.seconds))],
        }
        (out / "compare_meta.json").write_text(json.dumps(meta, indent=2))
        if config.plots:
            svg.bar_chart(out / "timing.svg", [r.optimizer for r in rows], [r.seconds for r in rows],
                          title="Training wall-clock time", ylabel="seconds")
            svg.line_plot(out / "loss_compare.svg",
                          [_loss_series(out / r.optimizer / "loss.csv", r.optimizer) for r in rows
                           if (out / r.optimizer / "loss.csv").is_file()],
                          title="Training loss by optimizer", xlabel="epoch", ylabel="total loss", logy=True)
    return rows


def _loss_series(path, label):
    recs = read_loss_log(path)
    return [r.epoch for r in recs], [r.total for r in recs], label
