"""Conversion of a parsed problem to min cᵀx + ½xᵀQx s.t. Ax = b, x ≥ 0.

Recipe, per original variable with bounds [l, u]:

* l finite, u = +inf: x = l + x'.
* l = -inf, u finite: x = u - x'.
* both finite, l < u: x = l + x' plus a row x' + w = u - l with slack w ≥ 0.
* l = u: the variable is fixed and substituted out.
* free: boxed at [-100, 100] and treated as the two-sided case.

Rows: L rows get +s, G rows get -s, ranged rows get a slack bounded by the
range width (so one more box row).  Free-variable boxes are recorded so
they can be widened while the solver runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .mps import RawProblem
from .sparse import SparseMatrix, from_scipy

FREE_BOX = 100.0


class InfeasibleBounds(ValueError):
    pass


@dataclass(frozen=True)
class FreeBox:
    orig: int          # original variable index
    col: int           # standard-form column of the shifted variable
    slack_col: int     # column of the box slack w
    row: int           # row x' + w = u - l
    lower: float
    upper: float


@dataclass(frozen=True)
class BoxPolicy:
    """When a boxed free variable gets within ``trigger`` (relative) of a bound,
    that bound is multiplied by ``factor``."""

    initial: float = FREE_BOX
    trigger: float = 0.01
    factor: float = 2.0


@dataclass(frozen=True)
class StandardQP:
    name: str
    c: np.ndarray
    Q: SparseMatrix
    A: SparseMatrix
    b: np.ndarray
    constant: float
    free_boxes: tuple[FreeBox, ...]
    # x_orig = shift + sign * x_std[col]  (col = -1 for fixed variables)
    orig_col: np.ndarray
    orig_shift: np.ndarray
    orig_sign: np.ndarray
    maximize: bool = False
    raw: RawProblem | None = field(default=None, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.A.nrows

    @property
    def n(self) -> int:
        return self.A.ncols

    @property
    def is_lp(self) -> bool:
        return self.Q.nnz == 0

    def objective(self, x: np.ndarray) -> float:
        """cᵀx + ½xᵀQx + constant, the (minimization form) original objective."""
        Qx = self.Q.full() @ x
        return float(self.c @ x + 0.5 * x @ Qx + self.constant)

    def recover(self, x: np.ndarray) -> np.ndarray:
        """Original variables from a standard-form point."""
        out = self.orig_shift.copy()
        live = self.orig_col >= 0
        out[live] += self.orig_sign[live] * x[self.orig_col[live]]
        return out


def to_standard_form(raw: RawProblem, policy: BoxPolicy = BoxPolicy(),
                     boxes: dict[int, tuple[float, float]] | None = None) -> StandardQP:
    """Build the standard-form problem.  ``boxes`` overrides the box of free variables."""
    boxes = dict(boxes or {})
    n0, m0 = raw.ncols, raw.nrows
    sgn = -1.0 if raw.maximize else 1.0

    c0 = np.zeros(n0)
    for j, v in raw.cost.items():
        c0[j] = v
    c0 *= sgn
    if raw.quad:
        i, j, v = zip(*raw.quad)
        Ql = sp.coo_matrix((v, (i, j)), shape=(n0, n0)).tocsc()
        Q0 = (Ql + sp.tril(Ql, k=-1).T).tocsc() * sgn
    else:
        Q0 = sp.csc_matrix((n0, n0))
    if raw.entries:
        i, j, v = zip(*raw.entries)
        A0 = sp.coo_matrix((v, (i, j)), shape=(m0, n0)).tocsc()
    else:
        A0 = sp.csc_matrix((m0, n0))
    b0 = np.array([raw.rhs.get(i, 0.0) for i in range(m0)])

    lo = np.empty(n0)
    up = np.empty(n0)
    free = []
    for j in range(n0):
        lo[j], up[j] = raw.bounds(j)
        if lo[j] > up[j]:
            raise InfeasibleBounds(f"column {raw.col_names[j]}: lower {lo[j]} > upper {up[j]}")
        if lo[j] == -math.inf and up[j] == math.inf:
            free.append(j)
            lo[j], up[j] = boxes.get(j, (-policy.initial, policy.initial))

    # structural substitution x = shift + sign * x'
    shift = np.zeros(n0)
    sign = np.ones(n0)
    col = np.full(n0, -1, dtype=np.int64)
    bounded = []          # (std col, width) for x' + w = width rows
    k = 0
    for j in range(n0):
        if lo[j] == up[j]:
            shift[j] = lo[j]
            continue
        if lo[j] > -math.inf:
            shift[j] = lo[j]
            if up[j] < math.inf:
                bounded.append((k, up[j] - lo[j]))
        else:
            shift[j] = up[j]
            sign[j] = -1.0
        col[j] = k
        k += 1
    ns = k
    live = np.flatnonzero(col >= 0)
    P = sp.csc_matrix((sign[live], (live, col[live])), shape=(n0, ns))

    c = P.T @ (c0 + Q0 @ shift)
    Qs = (P.T @ Q0 @ P).tocsc()
    constant = sgn * raw.constant + c0 @ shift + 0.5 * shift @ (Q0 @ shift)
    As = (A0 @ P).tocsc()
    b = b0 - A0 @ shift

    # row slacks
    slack_entries = []    # (row, sign)
    for i, kind in enumerate(raw.row_types):
        r = raw.ranges.get(i)
        if r is not None and r != 0.0:
            if kind == "E":
                lo_i, hi_i = (b[i], b[i] + r) if r > 0 else (b[i] + r, b[i])
            elif kind == "L":
                lo_i, hi_i = b[i] - abs(r), b[i]
            else:
                lo_i, hi_i = b[i], b[i] + abs(r)
            b[i] = lo_i
            slack_entries.append((i, -1.0))
            bounded.append((ns + len(slack_entries) - 1, hi_i - lo_i))
        elif kind == "L":
            slack_entries.append((i, 1.0))
        elif kind == "G":
            slack_entries.append((i, -1.0))
    nsl = len(slack_entries)
    if nsl:
        ri, rs = zip(*slack_entries)
        S = sp.csc_matrix((rs, (ri, range(nsl))), shape=(m0, nsl))
    else:
        S = sp.csc_matrix((m0, 0))

    nb = len(bounded)
    nx = ns + nsl
    n = nx + nb
    top = sp.hstack([As, S, sp.csc_matrix((m0, nb))])
    bc, bw = (zip(*bounded) if nb else ((), ()))
    rows_b = np.arange(nb)
    box = sp.csc_matrix((np.ones(2 * nb),
                         (np.r_[rows_b, rows_b], np.r_[np.array(bc, dtype=np.int64), nx + rows_b])),
                        shape=(nb, n))
    A = sp.vstack([top, box]).tocsc()
    b = np.r_[b, np.array(bw, dtype=float)]
    cfull = np.r_[c, np.zeros(nsl + nb)]
    Qfull = sp.block_diag([Qs, sp.csc_matrix((nsl + nb, nsl + nb))]).tocsc()

    box_of = {bcol: t for t, bcol in enumerate(bc)}
    fb = tuple(FreeBox(j, int(col[j]), nx + box_of[int(col[j])], m0 + box_of[int(col[j])],
                       float(lo[j]), float(up[j])) for j in free)

    return StandardQP(name=raw.name, c=np.asarray(cfull, dtype=float),
                      Q=from_scipy(Qfull, symmetric=True), A=from_scipy(A),
                      b=b, constant=float(constant), free_boxes=fb,
                      orig_col=col, orig_shift=shift, orig_sign=sign,
                      maximize=raw.maximize, raw=raw)


def expand_free_boxes(problem: StandardQP, x: np.ndarray,
                      policy: BoxPolicy = BoxPolicy()) -> tuple[StandardQP, bool]:
    """Double any free-variable bound the iterate has come within 1% of."""
    if not problem.free_boxes:
        return problem, False
    xo = problem.recover(x)
    new = {}
    changed = False
    for fb in problem.free_boxes:
        lo, up = fb.lower, fb.upper
        v = xo[fb.orig]
        if v >= up - policy.trigger * abs(up):
            up *= policy.factor
        if v <= lo + policy.trigger * abs(lo):
            lo *= policy.factor
        changed |= (lo, up) != (fb.lower, fb.upper)
        new[fb.orig] = (lo, up)
    if not changed:
        return problem, False
    return to_standard_form(problem.raw, policy, boxes=new), True


def transfer_point(old: StandardQP, new: StandardQP, x: np.ndarray) -> np.ndarray:
    """Map a standard-form point across a box change, keeping the original
    variables (and hence every residual) unchanged."""
    x = np.array(x, dtype=float)
    for fo, fn in zip(old.free_boxes, new.free_boxes):
        x[fn.col] += fo.lower - fn.lower
        x[fn.slack_col] += fn.upper - fo.upper
    return x



def from_arrays(c, A, b, Q=None, name: str = "") -> StandardQP:
    """Wrap data that is already in standard form."""
    A = sp.csc_matrix(A, dtype=float)
    m, n = A.shape
    Qm = sp.csc_matrix((n, n)) if Q is None else sp.csc_matrix(Q, dtype=float)
    return StandardQP(name=name, c=np.asarray(c, dtype=float), Q=from_scipy(Qm, symmetric=True),
                      A=from_scipy(A), b=np.asarray(b, dtype=float), constant=0.0,
                      free_boxes=(), orig_col=np.arange(n), orig_shift=np.zeros(n),
                      orig_sign=np.ones(n))
