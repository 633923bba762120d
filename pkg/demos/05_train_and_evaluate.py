"""
A short training run end to end
===============================

The defaults train for 5000 epochs on 10000 collocation points, which takes
several minutes on one core. This demo uses a lighter setting so it runs in
well under a minute; the CLI reproduces the full runs.
"""

# %%
from pathlib import Path

from burgers_pinn import harness
from burgers_pinn.harness import RunConfig

out = Path("runs/demo")
cfg = RunConfig(optimizer="diffgrad", epochs=300, nf=2000, out_dir=out)
result = harness.train(cfg)
first, last = result.records[0], result.records[-1]
print(f"loss {first.total:.3e} -> {result.final_loss.total:.3e} in {result.seconds:.1f} s")

# %% [markdown]
# Evaluate on the 100 x 256 grid against the finite-difference reference.
# Snapshot CSV and SVG files land next to the loss log.

# %%
report = harness.evaluate(result.params, cfg)
print("relative L2 error", round(report.rel_l2, 4))
for t, e in zip(report.snapshot_times, report.snapshot_max_abs_err):
    print(f"t = {t:4.2f}  max abs error {e:.3f}")
print(sorted(p.name for p in out.iterdir()))
