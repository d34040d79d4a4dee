"""Curve data: 6*Gamma(t) per n, normalized memory vs n, and the unequal-rate rate sum.

    python scripts/curve_data.py [outdir]
"""
import sys
from pathlib import Path

from switchmem.cli import main

out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
out.mkdir(parents=True, exist_ok=True)
jobs = {
    "gamma_curves.csv": ["--curve", "gamma", "--n", "2", "--n-max", "5", "--t-max", "0.6", "--points", "301"],
    "memory_vs_n.csv": ["--curve", "memory", "--n-max", "15"],
    "unequal_rates.csv": ["--curve", "unequal", "--t-max", "2", "--points", "401"],
}
for name, args in jobs.items():
    code = main(["plotdata", *args, "--out", str(out / name)])
    if code:
        sys.exit(code)
    print(f"wrote {out / name}")
