"""Compressed-sparse-column matrices and the small algebra the solver needs.

Storage is a thin wrapper over :class:`scipy.sparse.csc_matrix` that adds a
symmetry flag.  Symmetric matrices are stored as their lower triangle only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

GENERAL = "general"
LOWER = "lower"


@dataclass(frozen=True)
class SparseMatrix:
    """CSC matrix with canonical structure (sorted rows, no duplicates)."""

    csc: sp.csc_matrix
    symmetry: str = GENERAL

    def __post_init__(self):
        if self.symmetry not in (GENERAL, LOWER):
            raise ValueError(f"unknown symmetry flag {self.symmetry!r}")
        if self.symmetry == LOWER:
            if self.nrows != self.ncols:
                raise ValueError("symmetric storage needs a square matrix")
            if sp.triu(self.csc, k=1).nnz:
                raise ValueError("lower-stored matrix has entries above the diagonal")

    @property
    def nrows(self) -> int:
        return self.csc.shape[0]

    @property
    def ncols(self) -> int:
        return self.csc.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.csc.shape

    @property
    def nnz(self) -> int:
        return self.csc.nnz

    @property
    def indptr(self) -> np.ndarray:
        return self.csc.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.csc.indices

    @property
    def data(self) -> np.ndarray:
        return self.csc.data

    @property
    def is_symmetric(self) -> bool:
        return self.symmetry == LOWER

    def full(self) -> sp.csc_matrix:
        """Both triangles as a scipy matrix (the matrix itself when general)."""
        if self.symmetry == GENERAL:
            return self.csc
        strict = sp.tril(self.csc, k=-1)
        return (self.csc + strict.T).tocsc()

    def toarray(self) -> np.ndarray:
        return self.full().toarray()

    def diagonal(self) -> np.ndarray:
        return self.csc.diagonal()

    def columns(self, cols: Sequence[int]) -> "SparseMatrix":
        """Column submatrix of a general matrix."""
        if self.symmetry != GENERAL:
            raise ValueError("column extraction is defined for general matrices")
        return SparseMatrix(_canonical(self.csc[:, np.asarray(cols, dtype=np.int64)]))

    def principal(self, idx: Sequence[int]) -> "SparseMatrix":
        """Principal submatrix M[idx, idx], keeping the storage convention."""
        idx = np.asarray(idx, dtype=np.int64)
        sub = self.full()[idx, :][:, idx]
        if self.symmetry == LOWER:
            return SparseMatrix(_canonical(sp.tril(sub)), LOWER)
        return SparseMatrix(_canonical(sub))


def _canonical(m) -> sp.csc_matrix:
    out = sp.csc_matrix(m, dtype=float)
    out.sum_duplicates()
    out.sort_indices()
    return out


def from_scipy(m, symmetric: bool = False) -> SparseMatrix:
    """Wrap a scipy/numpy matrix; ``symmetric`` keeps only the lower triangle."""
    m = sp.csc_matrix(m, dtype=float)
    if symmetric:
        return SparseMatrix(_canonical(sp.tril(m)), LOWER)
    return SparseMatrix(_canonical(m))


def from_triplets(nrows: int, ncols: int, entries: Iterable[tuple[int, int, float]],
                  symmetric: bool = False) -> SparseMatrix:
    """Build a matrix from ``(i, j, value)`` triplets, summing duplicates.

    With ``symmetric=True`` an entry given in the upper triangle is moved to
    its mirror position, so either half may be supplied.
    """
    entries = list(entries)
    rows = np.array([e[0] for e in entries], dtype=np.int64)
    cols = np.array([e[1] for e in entries], dtype=np.int64)
    vals = np.array([e[2] for e in entries], dtype=float)
    if entries:
        if rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols:
            bad = next(e for e in entries
                       if not (0 <= e[0] < nrows and 0 <= e[1] < ncols))
            raise IndexError(f"entry {bad} outside a {nrows}x{ncols} matrix")
    if symmetric:
        if nrows != ncols:
            raise ValueError("symmetric matrix must be square")
        rows, cols = np.maximum(rows, cols), np.minimum(rows, cols)
    m = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsc()
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return SparseMatrix(m, LOWER if symmetric else GENERAL)


def identity(n: int) -> SparseMatrix:
    return SparseMatrix(sp.identity(n, format="csc", dtype=float), LOWER)


def diagonal_matrix(d: np.ndarray) -> SparseMatrix:
    return SparseMatrix(sp.diags(np.asarray(d, dtype=float), format="csc"), LOWER)


def spmv(M: SparseMatrix, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (M.ncols,):
        raise ValueError(f"vector of length {v.shape} does not match {M.shape}")
    if M.symmetry == LOWER:
        out = M.csc @ v
        strict = sp.tril(M.csc, k=-1)
        return out + strict.T @ v
    return M.csc @ v


def aat_product(A: SparseMatrix, scale: np.ndarray | None = None,
                cols: Sequence[int] | None = None) -> SparseMatrix:
    """Sum of ``scale[k] * a_j a_j^T`` over the selected columns, lower-stored.

    The result is m x m whatever the column selection.  Structural entries are
    kept even when the numerical value cancels, so the pattern depends only on
    which columns are selected.
    """
    csc = A.csc
    if cols is not None:
        csc = csc[:, np.asarray(cols, dtype=np.int64)]
    k = csc.shape[1]
    if scale is None:
        scale = np.ones(k)
    scale = np.asarray(scale, dtype=float)
    if scale.shape != (k,):
        raise ValueError(f"{scale.shape[0]} scales for {k} columns")
    if np.any(scale < 0):
        raise ValueError("column scales must be nonnegative")
    scaled = csc @ sp.diags(scale)
    prod = (scaled @ csc.T).tocsc()
    prod.sort_indices()
    return SparseMatrix(_canonical(sp.tril(prod)), LOWER)


def inf_norm_sym(M: SparseMatrix) -> float:
    """Maximum absolute row sum, counting the mirrored half of symmetric storage."""
    if M.nrows != M.ncols:
        raise ValueError("inf_norm_sym expects a square matrix")
    if M.nnz == 0:
        return 0.0
    absfull = abs(M.full())
    return float(np.max(np.asarray(absfull.sum(axis=1)).ravel()))


def two_norm_estimate(A: SparseMatrix, iters: int = 200, tol: float = 1e-10) -> float:
    """Power iteration on A^T A; returns an estimate of the largest singular value."""
    if iters < 1:
        raise ValueError("iters must be at least 1")
    if A.nnz == 0:
        return 0.0
    full = A.full()
    rng = np.random.default_rng(12345)
    v = rng.uniform(0.5, 1.5, size=A.ncols)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = full.T @ (full @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(np.sqrt(nw))
        if abs(new - sigma) <= tol * new:
            sigma = new
            break
        sigma = new
    return float(np.linalg.norm(full @ v))


def permute_symmetric(M: SparseMatrix, perm: Sequence[int]) -> SparseMatrix:
    """Return P M P^T where row/column i of the result is perm[i] of M."""
    perm = np.asarray(perm, dtype=np.int64)
    n = M.nrows
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValueError("perm is not a permutation of 0..n-1")
    full = M.full()
    sub = full[perm, :][:, perm]
    if M.symmetry == LOWER:
        return SparseMatrix(_canonical(sp.tril(sub)), LOWER)
    return SparseMatrix(_canonical(sub))


def offdiag(M: sp.spmatrix) -> sp.csc_matrix:
    """off(M): same off-diagonal entries, zero diagonal."""
    M = sp.csc_matrix(M)
    return (M - sp.diags(M.diagonal())).tocsc()
