"""Write the hand-built QP and toy fixtures into src/ndreg/data.

QP fixtures are small Hock-Schittkowski problems from the Maros-Meszaros
set, typed in from their published definitions.  Toy LPs cover special
cases used by the tests: a rank-deficient constraint matrix, a square
system whose variables all stay basic, and an infeasible instance.
"""
import math
import os
import sys

import numpy as np

from ndreg.mps import RawProblem, write_mps

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "src", "ndreg", "data")


def build(name, c, A, kinds, rhs, Q=None, lower=None, upper=None, ranges=None,
          constant=0.0, note=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    p = RawProblem(name=name, objective="OBJ")
    p.col_names = [f"X{j + 1:02d}" for j in range(n)]
    p.row_names = [f"C{i + 1:02d}" for i in range(m)]
    p.row_types = list(kinds)
    p.entries = [(i, j, float(A[i, j])) for j in range(n) for i in range(m) if A[i, j] != 0]
    p.cost = {j: float(v) for j, v in enumerate(c) if v != 0}
    p.rhs = {i: float(v) for i, v in enumerate(rhs) if v != 0}
    p.ranges = dict(ranges or {})
    p.constant = constant
    for j in range(n):
        if lower is not None and lower[j] != 0.0:
            p.lower[j] = lower[j]
        if upper is not None and upper[j] != math.inf:
            p.upper[j] = upper[j]
    if Q is not None:
        Q = np.asarray(Q, dtype=float)
        p.quad = [(i, j, float(Q[i, j])) for j in range(n) for i in range(j, n) if Q[i, j] != 0]
    return p, note


def hs21():
    # min 0.01 x1^2 + x2^2 - 100, 10 x1 - x2 >= 10, 2 <= x1 <= 50, -50 <= x2 <= 50
    return build("HS21", [0, 0], [[10, -1]], "G", [10], Q=np.diag([0.02, 2.0]),
                 lower=[2, -50], upper=[50, 50], constant=-100.0,
                 note="optimal objective -99.96")


def hs35():
    Q = [[4, 2, 2], [2, 4, 0], [2, 0, 2]]
    return build("HS35", [-8, -6, -4], [[1, 1, 2]], "L", [3], Q=Q, constant=9.0,
                 note="optimal objective 0.1111111111111111")


def hs76():
    Q = [[2, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 2, 1], [0, 0, 1, 1]]
    A = [[1, 2, 1, 1], [3, 1, 2, -1], [0, 1, 4, 0]]
    return build("HS76", [-1, -3, 1, -1], A, "LLG", [5, 4, 1.5], Q=Q,
                 note="optimal objective -4.681818181818182")


def hs118():
    n = 15
    c = np.tile([2.3, 1.7, 2.2], 5)
    Q = np.diag(np.tile([0.0002, 0.0002, 0.0003], 5))
    rows, kinds, rhs, ranges = [], [], [], {}
    for j in range(1, 5):
        for k, width in enumerate((13.0, 14.0, 13.0)):
            a = np.zeros(n)
            a[3 * j + k] = 1.0
            a[3 * j - 3 + k] = -1.0
            ranges[len(rows)] = width
            rows.append(a)
            kinds.append("G")
            rhs.append(-7.0)
    for t, s in enumerate((60, 50, 70, 85, 100)):
        a = np.zeros(n)
        a[3 * t:3 * t + 3] = 1.0
        rows.append(a)
        kinds.append("G")
        rhs.append(s)
    lower = [8, 43, 3] + [0] * 12
    upper = [21, 57, 16] + [90, 120, 60] * 4
    return build("HS118", c, np.array(rows), kinds, rhs, Q=Q, lower=lower, upper=upper,
                 ranges=ranges, note="optimal objective 664.82045")


def hs268():
    D = np.array([[-74, 80, 18, -11, -4], [14, -69, 21, 28, 0], [66, -72, -5, 7, 1],
                  [-12, 66, -30, -23, 3], [3, 8, -7, -4, 1]], dtype=float)
    d = np.array([51, -61, -56, 69, 10], dtype=float)
    A = [[-1, -1, -1, -1, -1], [10, 10, -3, 5, 4], [-8, 1, -2, -5, 3],
         [8, -1, 2, 5, -3], [-4, -2, 3, -5, 1]]
    inf = math.inf
    return build("HS268", -2 * D.T @ d, A, "GGGGG", [-5, 20, -40, 11, -30], Q=2 * D.T @ D,
                 lower=[-inf] * 5, upper=[inf] * 5, constant=float(d @ d),
                 note="optimal objective 0.0 at x = (1, 2, -1, 3, -4)")


def genhs28():
    n = 10
    Q = np.zeros((n, n))
    for i in range(n - 1):
        e = np.zeros(n)
        e[i] = e[i + 1] = 1.0
        Q += 2 * np.outer(e, e)
    A = np.zeros((8, n))
    for i in range(8):
        A[i, i:i + 3] = [1, 2, 3]
    inf = math.inf
    return build("GENHS28", np.zeros(n), A, "E" * 8, [1] * 8, Q=Q,
                 lower=[-inf] * n, upper=[inf] * n, note="optimal objective 0.9271736990761325")


def square():
    # every variable is basic at the unique feasible point
    rng = np.random.default_rng(7)
    n = 8
    A = rng.uniform(-1, 1, (n, n)) + n * np.eye(n)
    x = rng.uniform(1, 2, n)
    c = rng.uniform(0.5, 1.5, n)
    return build("SQUARE", c, A, "E" * n, A @ x, note=f"optimal objective {float(c @ x)!r}")


def rankdef():
    # transportation-like LP with a duplicated and a dependent row
    A = np.array([[1, 1, 1, 0, 0, 0],
                  [0, 0, 0, 1, 1, 1],
                  [1, 0, 0, 1, 0, 0],
                  [0, 1, 0, 0, 1, 0],
                  [0, 0, 1, 0, 0, 1],
                  [1, 1, 1, 0, 0, 0],
                  [1, 1, 1, 1, 1, 1]], dtype=float)
    b = [3, 4, 2, 2, 3, 3, 7]
    c = [1, 3, 2, 2, 1, 4]
    return build("RANKDEF", c, A, "E" * 7, b, note="optimal objective 12.0")


def infeasible():
    return build("INFEAS", [1], [[1]], "E", [-1], note="infeasible")


def tiny():
    return build("TINY", [1, 2], [[1, 1]], "E", [2], note="optimal objective 2.0")


FIXTURES = {"maros": [hs21, hs35, hs76, hs118, hs268, genhs28],
            "toy": [square, rankdef, infeasible, tiny]}


def main() -> None:
    for folder, makers in FIXTURES.items():
        os.makedirs(os.path.join(DATA, folder), exist_ok=True)
        for make in makers:
            p, note = make()
            ext = "qps" if p.quad else "mps"
            path = os.path.join(DATA, folder, f"{p.name.lower()}.{ext}")
            with open(path, "w") as fh:
                if note:
                    fh.write(f"* {note}\n")
                fh.write(write_mps(p))
            print(path, file=sys.stderr)


if __name__ == "__main__":
    main()
