#!/usr/bin/env python3
"""Run the four uniform-estimate proxies at production resolution and
print the per-t tables plus summaries.

Usage: python scripts/run_uniformity_sweeps.py [outdir]
"""

import sys
from pathlib import Path

from conifold_lab.experiments import ExperimentConfig, emit, run

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results")

SWEEPS = [
    ExperimentConfig(experiment="embedding_uniformity", n_per_region=2000,
                     family_size=32),
    ExperimentConfig(experiment="invertibility_uniformity", n_per_region=2000,
                     e_max=12.0),
    ExperimentConfig(experiment="compact_invertibility", model="spindle",
                     n_per_region=800, e_max=12.0),
    ExperimentConfig(experiment="poincare_uniformity", n_per_region=800,
                     e_max=12.0),
    ExperimentConfig(experiment="gns_uniformity", n_per_region=800,
                     family_size=32),
]


def main():
    failures = []
    for cfg in SWEEPS:
        res = run(cfg)
        emit(res, formats=("csv", "json", "plotdata"), out_dir=OUT)
        print(f"== {res.experiment} ==")
        for row in res.rows:
            items = "  ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                              for k, v in row.items())
            print("  " + items)
        print(f"  summary: {res.summary}")
        if not res.passed:
            failures.append(res.experiment)
    if failures:
        print(f"FAILING: {', '.join(failures)}")
        sys.exit(1)
    print(f"all sweeps uniform; tables in {OUT}/")


if __name__ == "__main__":
    main()
