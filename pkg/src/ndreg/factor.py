"""Sparse Cholesky and quasi-definite LDL^T with 1x1 pivots.

The numeric kernel is an up-looking LDL^T driven by the elimination tree
(the same scheme as QDLDL).  There is no dynamic pivoting: the symmetric
permutation is fixed beforehand and a bad pivot raises
:class:`FactorizationFailure` so that the caller can strengthen the
regularization and try again.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp

from .sparse import LOWER, SparseMatrix, inf_norm_sym, permute_symmetric

CHOL_PIVOT_FLOOR = 1e-30
LDL_PIVOT_REL = 1e-14


class FactorizationFailure(ArithmeticError):
    """Raised when a pivot is too small or has the wrong sign."""

    def __init__(self, index: int, pivot: float, reason: str):
        super().__init__(f"pivot {index} = {pivot:.3e}: {reason}")
        self.index = index
        self.pivot = pivot
        self.reason = reason


# -- ordering ---------------------------------------------------------------

def minimum_degree(pattern: SparseMatrix) -> np.ndarray:
    """Minimum-degree ordering of a symmetric pattern (ties broken by index).

    Plain elimination-graph version: adequate for the desk-scale systems the
    solver targets.
    """
    n = pattern.nrows
    full = pattern.full().tocsc()
    adj = [set() for _ in range(n)]
    for j in range(n):
        for i in full.indices[full.indptr[j]:full.indptr[j + 1]]:
            if i != j:
                adj[i].add(j)
                adj[j].add(int(i))
    alive = np.ones(n, dtype=bool)
    deg = np.array([len(a) for a in adj], dtype=np.int64)
    big = np.iinfo(np.int64).max
    order = np.empty(n, dtype=np.int64)
    for k in range(n):
        v = int(np.argmin(np.where(alive, deg, big)))
        order[k] = v
        alive[v] = False
        nbrs = adj[v]
        for u in nbrs:
            adj[u].discard(v)
            adj[u] |= nbrs - {u}
            deg[u] = len(adj[u])
        adj[v] = set()
    return order


def restrict_ordering(order: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Positions (in the kept subset) listed in the relative order of ``order``.

    ``keep`` is a sorted index array into the original numbering.
    """
    where = np.full(len(order), -1, dtype=np.int64)
    where[keep] = np.arange(len(keep))
    sub = where[order]
    return sub[sub >= 0]


# -- numeric kernels ----------------------------------------------------------

@numba.njit(cache=True)
def _etree(n, Ap, Ai):
    work = np.zeros(n, dtype=np.int64)
    Lnz = np.zeros(n, dtype=np.int64)
    etree = np.full(n, -1, dtype=np.int64)
    for j in range(n):
        work[j] = j
        for p in range(Ap[j], Ap[j + 1]):
            i = Ai[p]
            if i > j:
                return etree, Lnz, False
            while work[i] != j:
                if etree[i] == -1:
                    etree[i] = j
                Lnz[i] += 1
                work[i] = j
                i = etree[i]
    return etree, Lnz, True


@numba.njit(cache=True)
def _ldl_numeric(n, Ap, Ai, Ax, Lp, etree, signs, floor):
    """Returns (Li, Lx, D, failed_index).  failed_index = -1 on success.

    signs[k] = +1/-1 demands that sign for pivot k, 0 accepts either.  A
    pivot fails if |d| <= floor or its sign disagrees with signs[k].
    """
    nnzL = Lp[n]
    Li = np.zeros(nnzL, dtype=np.int64)
    Lx = np.zeros(nnzL, dtype=np.float64)
    D = np.zeros(n, dtype=np.float64)
    Dinv = np.zeros(n, dtype=np.float64)
    used = np.zeros(n, dtype=np.bool_)
    yvals = np.zeros(n, dtype=np.float64)
    yidx = np.zeros(n, dtype=np.int64)
    buf = np.zeros(n, dtype=np.int64)
    nextspace = Lp[:n].copy()
    for k in range(n):
        nnzy = 0
        for p in range(Ap[k], Ap[k + 1]):
            b = Ai[p]
            if b == k:
                D[k] = Ax[p]
                continue
            yvals[b] = Ax[p]
            nxt = b
            if not used[nxt]:
                used[nxt] = True
                buf[0] = nxt
                nnze = 1
                nxt = etree[b]
                while nxt != -1 and nxt < k:
                    if used[nxt]:
                        break
                    used[nxt] = True
                    buf[nnze] = nxt
                    nnze += 1
                    nxt = etree[nxt]
                while nnze:
                    nnze -= 1
                    yidx[nnzy] = buf[nnze]
                    nnzy += 1
        for t in range(nnzy - 1, -1, -1):
            c = yidx[t]
            tmp = nextspace[c]
            yc = yvals[c]
            for q in range(Lp[c], tmp):
                yvals[Li[q]] -= Lx[q] * yc
            Li[tmp] = k
            Lx[tmp] = yc * Dinv[c]
            D[k] -= yc * Lx[tmp]
            nextspace[c] += 1
            yvals[c] = 0.0
            used[c] = False
        d = D[k]
        if not (abs(d) > floor) or (signs[k] > 0 and d < 0) or (signs[k] < 0 and d > 0):
            return Li, Lx, D, k
        Dinv[k] = 1.0 / d
    return Li, Lx, D, -1


@numba.njit(cache=True)
def _ldl_solve(n, Lp, Li, Lx, D, x):
    for i in range(n):
        xi = x[i]
        for j in range(Lp[i], Lp[i + 1]):
            x[Li[j]] -= Lx[j] * xi
    for i in range(n):
        x[i] /= D[i]
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(Lp[i], Lp[i + 1]):
            s -= Lx[j] * x[Li[j]]
        x[i] = s
    return x


# -- factor objects -----------------------------------------------------------

@dataclass(frozen=True)
class LdlFactor:
    """P M P^T = L D L^T with unit lower L (strict part stored) and diagonal D."""

    n: int
    perm: np.ndarray
    Lp: np.ndarray
    Li: np.ndarray
    Lx: np.ndarray
    D: np.ndarray

    @property
    def L(self) -> SparseMatrix:
        strict = sp.csc_matrix((self.Lx, self.Li, self.Lp), shape=(self.n, self.n))
        return SparseMatrix((strict + sp.identity(self.n, format="csc")).tocsc())

    @property
    def nnz(self) -> int:
        """Nonzeros in L including the unit diagonal."""
        return int(self.Lp[self.n]) + self.n

    def inertia(self) -> tuple[int, int, int]:
        return (int(np.sum(self.D < 0)), int(np.sum(self.D > 0)), int(np.sum(self.D == 0)))


@dataclass(frozen=True)
class CholeskyFactor(LdlFactor):
    """LDL^T with a positive D; ``L`` returns the Cholesky factor L D^{1/2}."""

    @property
    def L(self) -> SparseMatrix:
        unit = LdlFactor.L.fget(self).csc
        return SparseMatrix((unit @ sp.diags(np.sqrt(self.D))).tocsc())


def _factor(M: SparseMatrix, perm, signs, floor, cls):
    if not M.is_symmetric:
        raise ValueError("factorization expects a symmetric lower-stored matrix")
    n = M.nrows
    perm = np.arange(n, dtype=np.int64) if perm is None else np.asarray(perm, dtype=np.int64)
    Mp = permute_symmetric(M, perm)
    upper = Mp.csc.T.tocsc()
    upper.sort_indices()
    Ap = upper.indptr.astype(np.int64)
    Ai = upper.indices.astype(np.int64)
    Ax = upper.data.astype(np.float64)
    etree, Lnz, ok = _etree(n, Ap, Ai)
    if not ok:
        raise ValueError("matrix is not in lower storage")
    Lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(Lnz, out=Lp[1:])
    Li, Lx, D, bad = _ldl_numeric(n, Ap, Ai, Ax, Lp, etree, signs[perm], floor)
    if bad >= 0:
        d = D[bad]
        reason = "below pivot floor" if abs(d) <= floor else "wrong sign"
        raise FactorizationFailure(int(perm[bad]), float(d), reason)
    return cls(n, perm, Lp, Li, Lx, D)


def cholesky(M: SparseMatrix, perm=None) -> CholeskyFactor:
    """Cholesky of a symmetric positive-definite matrix.

    Fails when any pivot is at or below ``CHOL_PIVOT_FLOOR``.
    """
    signs = np.ones(M.nrows, dtype=np.int64)
    return _factor(M, perm, signs, CHOL_PIVOT_FLOOR, CholeskyFactor)


def ldlt_quasidefinite(M: SparseMatrix, signs, perm=None) -> LdlFactor:
    """LDL^T with 1x1 pivots and a prescribed pivot sign per index.

    ``signs`` holds -1 for indices of the negative-definite block and +1 for
    the positive-definite block (original numbering).  A pivot with
    |d| < 1e-14 ||M||_inf or the wrong sign raises FactorizationFailure.
    """
    signs = np.asarray(signs, dtype=np.int64)
    if signs.shape != (M.nrows,):
        raise ValueError("one sign per row is required")
    floor = LDL_PIVOT_REL * inf_norm_sym(M)
    return _factor(M, perm, signs, floor, LdlFactor)


def solve(factor: LdlFactor, rhs, M: SparseMatrix | None = None, refine: int = 0) -> np.ndarray:
    """Solve M x = rhs with a factor of M; optional iterative refinement steps need M."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (factor.n,):
        raise ValueError(f"rhs of shape {rhs.shape} for a system of order {factor.n}")
    x = _apply(factor, rhs)
    if refine:
        if M is None:
            raise ValueError("refinement needs the matrix")
        full = M.full()
        for _ in range(refine):
            x = x + _apply(factor, rhs - full @ x)
    return x


def _apply(factor: LdlFactor, rhs: np.ndarray) -> np.ndarray:
    y = rhs[factor.perm].copy()
    _ldl_solve(factor.n, factor.Lp, factor.Li, factor.Lx, factor.D, y)
    x = np.empty_like(y)
    x[factor.perm] = y
    return x


def dense_ldlt(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unpivoted dense LDL^T; a cross-check for the sparse kernel."""
    M = np.array(M, dtype=float)
    n = M.shape[0]
    L = np.eye(n)
    d = np.zeros(n)
    for k in range(n):
        d[k] = M[k, k] - np.dot(L[k, :k] ** 2, d[:k])
        if d[k] == 0.0:
            raise FactorizationFailure(k, 0.0, "zero pivot")
        for i in range(k + 1, n):
            L[i, k] = (M[i, k] - np.dot(L[i, :k] * L[k, :k], d[:k])) / d[k]
    return L, d
