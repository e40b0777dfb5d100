"""PSNR against reception rate for the ideal code, Growth and the soliton reference.

    python scripts/video_quality.py [outdir]
"""
import sys
from pathlib import Path

from growthcodes.cli import main

out = Path(sys.argv[1] if len(sys.argv) > 1 else "results/video_quality")
out.mkdir(parents=True, exist_ok=True)
sys.exit(main(["quality", "--capacity", "15e6", "--eta-grid", "0.1:1.5:0.02",
               "--models", "ideal,growth,r-soliton-signfix", "--out", str(out / "psnr.csv")]))
