"""Residual loss and PSNR when the channel drops packets the allocation did not plan for.

One run per target residual loss. ``--planned-only`` variants are written too.

    python scripts/loss_mismatch.py [outdir]
"""
import sys
from pathlib import Path

from growthcodes.cli import main

out = Path(sys.argv[1] if len(sys.argv) > 1 else "results/loss_mismatch")
out.mkdir(parents=True, exist_ok=True)
base = ["--capacity", "15e6", "--target-pl", "0.05,0.10,0.15,0.20", "--pi-grid", "0:0.3:0.01"]
for argv in (
    ["allocate", "--capacity", "15e6", "--out", str(out / "allocation.csv")],
    ["mismatch", *base, "--out", str(out / "mismatch.csv")],
    ["mismatch", *base, "--planned-only", "--out", str(out / "mismatch_planned_only.csv")],
):
    code = main(argv)
    if code:
        sys.exit(code)
