"""Peeling-ODE trajectories (v_0 and c_1..c_d against decoding time) for a few rates.

    python scripts/degree_evolution.py [outdir]
"""
import sys

from growthcodes.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "results/degree_evolution"
sys.exit(main(["wormald", "--k", "1000", "--eta-grid", "0.5,0.75,1.0,1.5", "--out", out]))
