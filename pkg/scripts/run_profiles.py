#!/usr/bin/env python3
"""Performance profiles (time and iterations) from the run CSVs of run_tables.py.

    python3 scripts/run_profiles.py --out results/
"""
import argparse
from pathlib import Path

from ndreg import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    for runs in sorted(out.glob("*_runs.csv")):
        records = bench.read_records(runs)
        name = runs.stem.removesuffix("_runs")
        for metric in ("time", "iter"):
            prof = bench.performance_profile(records, metric)
            target = out / f"{name}_profile_{metric}.csv"
            target.write_text(prof.dumps())
            solved = ", ".join(f"{lab} {prof.curves[i, -1]:.2f}" for i, lab in enumerate(prof.labels))
            print(f"wrote {target}  (solved fraction: {solved})")


if __name__ == "__main__":
    main()
