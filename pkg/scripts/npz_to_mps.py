"""Convert the Netlib LP archives shipped with scipy's benchmark suite to free MPS.

Usage: python3 scripts/npz_to_mps.py SRC_DIR OUT_DIR NAME [NAME ...]

Each archive holds dense A_ub, b_ub, A_eq, b_eq, c and bounds; rows become
L and E rows named R0001..., columns C0001...  The reference optimum is kept
as a comment line so the fixture carries its own expected objective.
"""
import argparse
import math
import os

import numpy as np

from ndreg.mps import RawProblem, write_mps


def convert(path: str, name: str) -> tuple[RawProblem, float]:
    d = np.load(path, allow_pickle=True, encoding="latin1")
    c = np.asarray(d["c"], dtype=float)
    n = c.size
    Au, bu = np.asarray(d["A_ub"], dtype=float).reshape(-1, n), np.asarray(d["b_ub"], dtype=float).ravel()
    Ae, be = np.asarray(d["A_eq"], dtype=float).reshape(-1, n), np.asarray(d["b_eq"], dtype=float).ravel()
    p = RawProblem(name=name, objective="COST")
    p.col_names = [f"C{j + 1:04d}" for j in range(n)]
    blocks = [("L", Au, bu), ("E", Ae, be)]
    for kind, M, rhs in blocks:
        for r in range(M.shape[0]):
            i = len(p.row_names)
            p.row_names.append(f"R{i + 1:04d}")
            p.row_types.append(kind)
            if rhs[r] != 0.0:
                p.rhs[i] = float(rhs[r])
            for j in np.flatnonzero(M[r]):
                p.entries.append((i, int(j), float(M[r, j])))
    p.entries.sort(key=lambda e: (e[1], e[0]))
    p.cost = {j: float(c[j]) for j in np.flatnonzero(c)}
    bnd = d["bounds"]
    if bnd.size:
        for j, (lo, up) in enumerate(bnd.reshape(n, 2)):
            lo = -math.inf if lo is None else float(lo)
            up = math.inf if up is None else float(up)
            if lo != 0.0:
                p.lower[j] = lo
            if up != math.inf:
                p.upper[j] = up
    return p, float(d["obj"])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src")
    ap.add_argument("out")
    ap.add_argument("names", nargs="+")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name in args.names:
        p, obj = convert(os.path.join(args.src, f"{name}.npz"), name)
        text = write_mps(p)
        with open(os.path.join(args.out, f"{name.lower()}.mps"), "w") as fh:
            fh.write(f"* optimal objective {obj!r}\n")
            fh.write(text)
        print(f"{name}: m={p.nrows} n={p.ncols} nnz={len(p.entries)} obj={obj}")


if __name__ == "__main__":
    main()
