"""Recovery curve three ways: ODE, Monte Carlo (both decoders), fitted and preset model.

Writes the raw CLI outputs plus ``comparison.csv`` joining them on eta.

    python scripts/recovery_curve.py [outdir] [trials]
"""
import sys
from pathlib import Path

from growthcodes.analysis import read_curve_csv
from growthcodes.cli import main
from growthcodes.configio import read_csv, write_csv
from growthcodes.model import GROWTH, read_model

out = Path(sys.argv[1] if len(sys.argv) > 1 else "results/recovery_curve")
trials = sys.argv[2] if len(sys.argv) > 2 else "200"
out.mkdir(parents=True, exist_ok=True)
grid = "0.1:2.0:0.05"
mc_grid = "0.25:2.0:0.25"

steps = [
    ["wormald", "--eta-grid", grid, "--no-trajectories", "--out", str(out / "ode")],
    ["fit", "--curve", str(out / "ode" / "curve.csv"), "--label", "growth-ode", "--out", str(out / "model.cfg")],
    ["simulate", "--eta-grid", mc_grid, "--trials", trials, "--mode", "S", "--out", str(out / "mc_S.csv")],
    ["simulate", "--eta-grid", mc_grid, "--trials", trials, "--mode", "D", "--out", str(out / "mc_D.csv")],
]
for argv in steps:
    code = main(argv)
    if code:
        sys.exit(code)

ode = read_curve_csv(out / "ode" / "curve.csv")
fitted = read_model(out / "model.cfg")
mc = {}
for mode in "SD":
    header, rows = read_csv(out / f"mc_{mode}.csv")
    ie, ip = header.index("eta"), header.index("mean_pd")
    mc[mode] = {round(float(r[ie]), 9): float(r[ip]) for r in rows}

rows = []
for eta, pd in zip(ode.eta, ode.p_d):
    key = round(float(eta), 9)
    rows.append((eta, pd, mc["S"].get(key, ""), mc["D"].get(key, ""), fitted.pd(eta), GROWTH.pd(eta), min(eta, 1.0)))
write_csv(out / "comparison.csv", ("eta", "ode", "mc_S", "mc_D", "model_fitted", "model_preset", "ideal"), rows)
print(f"fitted lambda={fitted.lam:.4f} mu={fitted.mu:.4f}; preset lambda={GROWTH.lam} mu={GROWTH.mu}")
