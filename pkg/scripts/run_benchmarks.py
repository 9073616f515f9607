#!/usr/bin/env python3
"""Run every benchmark sweep at a chosen scale and print render commands.

    python scripts/run_benchmarks.py [desk|paper] [out_dir] [seed]

Desk scale finishes in minutes on a laptop; paper scale reproduces the full
study sizes (100 runs x 1e6 samples) and takes hours.
"""

import sys

from additive_scm.cli import main

scale = sys.argv[1] if len(sys.argv) > 1 else "desk"
out = sys.argv[2] if len(sys.argv) > 2 else "results"
seed = sys.argv[3] if len(sys.argv) > 3 else "0"

rc = 0
for panel in ("a", "b", "c"):
    rc |= main(["experiment", panel, "--scale", scale, "--seed", seed, "--out", out])

print("\nrender the figures with the plots package:")
for panel in ("a", "b", "c"):
    print(
        f"  node plots/dist/src/cli.js --panel {panel} "
        f"--in {out}/panel_{panel}/results.csv --out {out}/panel_{panel}/figure.svg"
    )
sys.exit(rc)
