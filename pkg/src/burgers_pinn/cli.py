"""Command-line entry point: ``burgers-pinn {train,evaluate,compare,sample-dump,oracle-dump}``.

A ``--config FILE`` holds ``key = value`` lines whose keys mirror the long
flags (``optimizer``, ``epochs``, ``schedule``, ``beta1`` ...); flags given
on the command line win.  Per-optimizer schedules use keys such as
``schedule_adam = 0:0.001``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness, network, optim, oracle, sampler
from .optim import LrSchedule

FLAG_KEYS = ("optimizer", "epochs", "seed", "n0", "nb", "nf", "sampling", "schedule", "snapshots",
             "grid", "out", "timing_mode", "beta1", "beta2", "eps", "rho", "no_plots")


def parse_config_file(path) -> dict:
    """Flat ``key = value`` text; ``#`` starts a comment; dashes in keys become underscores."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key = key.strip().lstrip("-").replace("-", "_")
        if key not in FLAG_KEYS and not key.startswith("schedule_"):
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _parse_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _parse_grid(text: str) -> tuple:
    nt, sep, nx = text.lower().partition("x")
    if not sep:
        raise ValueError(f"grid must look like NTxNX, got {text!r}")
    return int(nt), int(nx)


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def build_run_config(args: argparse.Namespace) -> harness.RunConfig:
    merged = {}
    if args.config:
        merged.update(parse_config_file(args.config))
    for key in FLAG_KEYS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            merged[key] = v

    kw = {}
    if "optimizer" in merged:
        kw["optimizer"] = str(merged["optimizer"])
    for key in ("epochs", "seed", "n0", "nb", "nf"):
        if key in merged:
            kw[key] = int(merged[key])
    for key in ("beta1", "beta2", "eps", "rho"):
        if key in merged:
            kw[key] = float(merged[key])
    if "sampling" in merged:
        kw["sampling"] = str(merged["sampling"])
    if "schedule" in merged:
        kw["schedule"] = LrSchedule.parse(str(merged["schedule"]))
    overrides = {k.removeprefix("schedule_"): LrSchedule.parse(v) for k, v in merged.items()
                 if k.startswith("schedule_")}
    if overrides:
        kw["schedule_overrides"] = overrides
    if "snapshots" in merged:
        kw["snapshot_times"] = _parse_floats(str(merged["snapshots"]))
    if "grid" in merged:
        kw["grid"] = _parse_grid(str(merged["grid"]))
    if "out" in merged:
        kw["out_dir"] = Path(merged["out"])
    if "timing_mode" in merged:
        kw["timing_mode"] = _truthy(merged["timing_mode"])
    if "no_plots" in merged:
        kw["plots"] = not _truthy(merged["no_plots"])
    return harness.RunConfig(**kw)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--optimizer", choices=optim.KINDS)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n0", type=int, help="initial-condition points")
    p.add_argument("--nb", type=int, help="boundary points")
    p.add_argument("--nf", type=int, help="interior collocation points")
    p.add_argument("--sampling", choices=sorted(sampler.SAMPLERS))
    p.add_argument("--schedule", help="piecewise learning rate, e.g. 0:0.01,1000:0.001,3000:0.0005")
    p.add_argument("--snapshots", help="comma-separated snapshot times")
    p.add_argument("--grid", help="evaluation grid NTxNX, default 100x256")
    p.add_argument("--out", help="output directory (default: runs/<subcommand>)")
    p.add_argument("--timing-mode", dest="timing_mode", action="store_true",
                   help="run compare sequentially for fair wall-clock numbers")
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--no-plots", dest="no_plots", action="store_true", help="skip SVG output")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burgers-pinn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("train", "train one optimizer and write loss log + checkpoint"),
                        ("evaluate", "evaluate a checkpoint against the reference solution"),
                        ("compare", "train all four optimizers on one shared training set"),
                        ("sample-dump", "write the sampled training sets as CSV"),
                        ("oracle-dump", "write the reference solution on the evaluation grid as CSV")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        if name == "evaluate":
            p.add_argument("--checkpoint", help="checkpoint file (default: OUT/checkpoint.txt)")
        if name == "oracle-dump":
            p.add_argument("--method", choices=("crank_nicolson", "colehopf"))
    return parser


def _out_dir(config: harness.RunConfig, command: str) -> harness.RunConfig:
    if config.out_dir is None:
        config = replace(config, out_dir=Path("runs") / command)
    Path(config.out_dir).mkdir(parents=True, exist_ok=True)
    return config


def cmd_train(config, args, parser):
    try:
        result = harness.train(config)
    except harness.TrainingDiverged as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return 1
    print(f"{config.optimizer}: final loss {result.final_loss.total:.4e} after {config.epochs} epochs "
          f"({result.seconds:.1f} s); outputs in {config.out_dir}")
    return 0


def cmd_evaluate(config, args, parser):
    ckpt = Path(args.checkpoint) if args.checkpoint else Path(config.out_dir) / "checkpoint.txt"
    if not ckpt.is_file():
        parser.error(f"checkpoint not found: {ckpt} (run `train` first or pass --checkpoint)")
    params, mlp, _ = network.load_checkpoint(ckpt)
    report = harness.evaluate(params, config, mlp=mlp)
    print(f"relative L2 error {report.rel_l2:.4e}; snapshot max|du/dx| {report.snapshot_max_slope_pred}")
    return 0


def cmd_compare(config, args, parser):
    rows = harness.compare(config)
    for r in rows:
        status = r.error or f"loss {r.final_loss:.4e}  rel_l2 {r.rel_l2:.4e}  {r.seconds:.1f} s"
        print(f"{r.optimizer:9s} {status}")
    return 0 if all(r.error is None for r in rows) else 1


def cmd_sample_dump(config, args, parser):
    data = harness.sample_data(config)
    path = harness.write_csv(Path(config.out_dir) / "samples.csv", ("set", "t", "x", "target"), data.rows())
    print(f"wrote {path} ({sum(data.sizes)} rows, digest {data.digest()[:12]})")
    return 0


def cmd_oracle_dump(config, args, parser):
    method = getattr(args, "method", None) or "crank_nicolson"
    t_grid, x_grid = harness.eval_grid(config)
    if method == "colehopf":
        grid = oracle.colehopf_grid(t_grid, x_grid)
        u = grid.u
    else:
        u = oracle.reference_crank_nicolson().interpolate(t_grid, x_grid)
    tt, xx = np.meshgrid(t_grid, x_grid, indexing="ij")
    path = harness.write_csv(Path(config.out_dir) / "oracle.csv", ("t", "x", "u"),
                             zip(tt.ravel(), xx.ravel(), u.ravel()))
    print(f"wrote {path} ({method}, {u.shape[0]}x{u.shape[1]})")
    return 0


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "sample-dump": cmd_sample_dump,
    "oracle-dump": cmd_oracle_dump,
}


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        config = _out_dir(build_run_config(args), args.command)
    except ValueError as exc:
        parser.error(str(exc))
    return COMMANDS[args.command](config, args, parser)


if __name__ == "__main__":
    sys.exit(main())
