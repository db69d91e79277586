#!/usr/bin/env python3
"""Desk-scale versions of the iteration and sparsity tables, written as CSV.

    python3 scripts/run_tables.py --out results/
"""
import argparse
import csv
from dataclasses import asdict, fields
from pathlib import Path

from ndreg import bench
from ndreg.regularizer import Mode

DATA = Path(bench.__file__).parent / "data"
SETS = {"netlib": 1e-6, "maros": 1e-8}


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--maxit", type=int, default=200)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, tol in SETS.items():
        records = bench.run_batch(DATA / name, list(Mode), tol, args.maxit)
        bench.write_records(records, out / f"{name}_runs.csv")
        by = {(r.problem, r.mode): r for r in records}
        problems = sorted({r.problem for r in records})

        rows = []
        for p in problems:
            row = [p]
            for mode in Mode:
                r = by[(p, mode.value)]
                row += [r.iterations, f"{r.seconds:.6f}", r.status]
            rows.append(row)
        header = ["problem"] + [f"{m.value}_{c}" for m in Mode for c in ("iter", "seconds", "status")]
        write(out / f"{name}_iterations.csv", header, rows)

        srows = []
        for p in problems:
            s = bench.sparsity_row(by[(p, "nondiag")], by[(p, "uniform")])
            if s is not None:
                srows.append(list(asdict(s).values()))
        write(out / f"{name}_sparsity.csv", [f.name for f in fields(bench.SparsityRow)], srows)


if __name__ == "__main__":
    main()
