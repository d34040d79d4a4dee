"""Write both memory tables and the full-switch comparison as CSV files.

    python scripts/reproduce_tables.py [outdir]
"""
import sys
from pathlib import Path

from switchmem.cli import main

out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
out.mkdir(parents=True, exist_ok=True)
for cmd in ("table1", "table2", "fullswitch"):
    code = main([cmd, "--out", str(out / f"{cmd}.csv")])
    if code:
        sys.exit(code)
    print(f"wrote {out / (cmd + '.csv')}")
