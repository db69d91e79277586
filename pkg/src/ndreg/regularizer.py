"""Regularization schedule, N/B partition and the regularized linear systems.

Three modes share one interface:

* ``nondiag``: columns with small Θ_j go to N and the off-diagonal part of
  their contribution is absorbed by R_d (and R_p for QP).  While N is empty
  the plan falls back to the uniform regularization.
* ``uniform``: R_d = reg_thr·I (and R_p = reg_thr·I for QP).
* ``none``: no regularization.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .sparse import (SparseMatrix, aat_product, from_scipy, inf_norm_sym, offdiag,
                     two_norm_estimate)

THETA_MIN = 1e-30
THETA_MAX = 1e30
EPS_FLOOR = 1e-13


class Mode(str, Enum):
    NONDIAG = "nondiag"
    UNIFORM = "uniform"
    NONE = "none"


@dataclass(frozen=True)
class RegSchedule:
    reg_thr: float
    epsilon: float
    k: int = 0


def initial_schedule(tol: float, norm_A2: float) -> RegSchedule:
    """reg_thr starts at 1; the floor is max(0.1·tol/‖A‖², 1e-13)."""
    eps = EPS_FLOOR if norm_A2 == 0 else max(0.1 * tol / norm_A2 ** 2, EPS_FLOOR)
    return RegSchedule(1.0, eps, 0)


def update_schedule(sched: RegSchedule, mu_prev: float, mu_new: float) -> RegSchedule:
    """Follow μ's rate of decrease down to the floor; never increase."""
    ratio = min(1.0, mu_new / mu_prev) if mu_prev > 0 else 1.0
    return RegSchedule(max(sched.reg_thr * ratio, sched.epsilon), sched.epsilon, sched.k + 1)


def escalate(sched: RegSchedule, factor: float = 10.0) -> RegSchedule:
    return replace(sched, reg_thr=sched.reg_thr * factor)


def clamp_theta(theta: np.ndarray) -> np.ndarray:
    return np.clip(theta, THETA_MIN, THETA_MAX)


@dataclass(frozen=True)
class ColumnPartition:
    N: np.ndarray
    B: np.ndarray

    @property
    def n1(self) -> int:
        return len(self.N)

    @property
    def n2(self) -> int:
        return len(self.B)


def partition_columns(theta, reg_thr: float, norm_AAt: float,
                      norm_QQt: float | None = None) -> ColumnPartition:
    """j ∈ N iff Θ_j·‖AAᵀ‖∞ ≤ reg_thr (and Θ_j·‖QQᵀ‖∞ ≤ reg_thr for QP)."""
    theta = np.asarray(theta, dtype=float)
    inN = theta * norm_AAt <= reg_thr
    if norm_QQt is not None:
        inN &= theta * norm_QQt <= reg_thr
    return ColumnPartition(np.flatnonzero(inN), np.flatnonzero(~inN))


@dataclass(frozen=True)
class ProblemNorms:
    """Constants computed once per solve."""

    norm_AAt: float
    norm_QQt: float | None
    norm_A2: float


def problem_norms(A: SparseMatrix, Q: SparseMatrix | None) -> ProblemNorms:
    nQ = None
    if Q is not None and Q.nnz:
        Qf = Q.full()
        nQ = inf_norm_sym(from_scipy(Qf @ Qf.T, symmetric=True))
    return ProblemNorms(inf_norm_sym(aat_product(A)), nQ, two_norm_estimate(A))


@dataclass(frozen=True)
class RegPlan:
    """Everything needed to assemble one regularized system.

    ``uniform_fallback`` is set when non-diagonal mode found N empty.  For QP,
    ``qbar`` holds the diagonal Θ_N⁻¹ + diag(Q_N) + Δ_pN.
    """

    mode: Mode
    partition: ColumnPartition
    reg_thr: float
    delta_d: float
    delta_pN: float = 0.0
    delta_pB: float = 0.0
    qbar: np.ndarray | None = None
    uniform_fallback: bool = False

    @property
    def nondiag_active(self) -> bool:
        return self.mode == Mode.NONDIAG and not self.uniform_fallback

    @property
    def regularized(self) -> bool:
        return self.mode != Mode.NONE


def _empty_partition(n: int) -> ColumnPartition:
    return ColumnPartition(np.zeros(0, dtype=np.int64), np.arange(n))


def uniform_plan(sched: RegSchedule, n: int, is_qp: bool, mode: Mode = Mode.UNIFORM) -> RegPlan:
    """R_d = reg_thr·I, plus R_p = reg_thr·I for QP."""
    r = sched.reg_thr
    return RegPlan(mode, _empty_partition(n), r, r, 0.0, r if is_qp else 0.0,
                   uniform_fallback=(mode == Mode.NONDIAG))


def none_plan(n: int) -> RegPlan:
    return RegPlan(Mode.NONE, _empty_partition(n), 0.0, 0.0)


def make_plan(mode: Mode, A: SparseMatrix, Q: SparseMatrix | None, theta: np.ndarray,
              sched: RegSchedule, norms: ProblemNorms) -> RegPlan:
    n = A.ncols
    is_qp = Q is not None and Q.nnz > 0
    if mode == Mode.NONE:
        return none_plan(n)
    if mode == Mode.UNIFORM:
        return uniform_plan(sched, n, is_qp)
    part = partition_columns(theta, sched.reg_thr, norms.norm_AAt,
                             norms.norm_QQt if is_qp else None)
    if part.n1 == 0:
        return uniform_plan(sched, n, is_qp, Mode.NONDIAG)
    norm_ANAN = inf_norm_sym(aat_product(A, cols=part.N))
    if not is_qp:
        delta_d = float(theta[part.N].max()) * norm_ANAN
        return RegPlan(mode, part, sched.reg_thr, delta_d or sched.epsilon)
    Qf = Q.full().tocsc()
    QN = Qf[part.N, :][:, part.N]
    delta_pN = float(np.max(np.asarray(abs(QN).sum(axis=1)).ravel())) if QN.nnz else 0.0
    qbar = 1.0 / theta[part.N] + QN.diagonal() + delta_pN
    qinv_max = float((1.0 / qbar).max())
    QBN = Qf[part.B, :][:, part.N]
    norm_QBN = inf_norm_sym(from_scipy(QBN @ QBN.T, symmetric=True)) if part.n2 else 0.0
    # an all-zero A_N would leave R_d = 0
    delta_d = qinv_max * norm_ANAN or sched.epsilon
    return RegPlan(mode, part, sched.reg_thr, delta_d, delta_pN, qinv_max * norm_QBN, qbar)


# -- LP: normal equations ----------------------------------------------------

def build_lp_normal_matrix(A: SparseMatrix, theta: np.ndarray, plan: RegPlan) -> SparseMatrix:
    """Regularized normal matrix for the plan.

    non-diagonal: A_BΘ_BA_Bᵀ + diag(A_NΘ_NA_Nᵀ) + δ_d I
    uniform:      AΘAᵀ + reg_thr I
    none:         AΘAᵀ
    """
    m = A.nrows
    if not plan.nondiag_active:
        K = aat_product(A, theta).csc
        if plan.regularized:
            K = K + plan.delta_d * sp.identity(m, format="csc")
        return from_scipy(K, symmetric=True)
    N, B = plan.partition.N, plan.partition.B
    KB = aat_product(A, theta[B], cols=B).csc
    AN = A.csc[:, N]
    dN = np.asarray(AN.multiply(AN) @ theta[N]).ravel()
    return from_scipy(KB + sp.diags(dN + plan.delta_d, format="csc"), symmetric=True)


def lp_dual_regularizer(A: SparseMatrix, theta: np.ndarray, plan: RegPlan) -> np.ndarray:
    """Explicit dense R_d = δ_d I − off(A_NΘ_NA_Nᵀ) (δ_d I or 0 outside nondiag)."""
    m = A.nrows
    Rd = plan.delta_d * np.eye(m)
    if plan.nondiag_active:
        KN = aat_product(A, theta[plan.partition.N], cols=plan.partition.N)
        Rd -= offdiag(KN.full()).toarray()
    return Rd


# -- QP: partially reduced augmented system ---------------------------------

@dataclass(frozen=True)
class QPSystem:
    """The quasi-definite matrix over (x_B, y) and what the back-solve needs."""

    matrix: SparseMatrix
    signs: np.ndarray
    partition: ColumnPartition
    qbar: np.ndarray          # empty when N is empty
    W: sp.csc_matrix          # A_B − A_N Q̄_N⁻¹ Q_BNᵀ
    QBN: sp.csc_matrix
    AN: sp.csc_matrix
    hdiag: np.ndarray         # H̄ − Q_B (diagonal)
    dstar: np.ndarray         # D* (diagonal)


def build_qp_reduced_system(A: SparseMatrix, Q: SparseMatrix, theta: np.ndarray,
                            plan: RegPlan) -> QPSystem:
    """[[−H̄, Wᵀ], [W, D*]] where, with N nonempty,

    H̄  = Q_B + Θ_B⁻¹ + Δ_pB I − diag(Q_BN Q̄_N⁻¹ Q_BNᵀ)
    W  = A_B − A_N Q̄_N⁻¹ Q_BNᵀ
    D* = diag(A_N Q̄_N⁻¹ A_Nᵀ) + δ_d I.

    With N empty this is the augmented system with R_p = Δ_pB·I, R_d = δ_d·I.
    """
    m = A.nrows
    part = plan.partition
    N, B = part.N, part.B
    Af = A.csc
    Qf = Q.full().tocsc()
    QB = Qf[B, :][:, B]
    AB = Af[:, B]
    if part.n1:
        qinv = 1.0 / plan.qbar
        QBN = Qf[B, :][:, N]
        AN = Af[:, N]
        S_diag = np.asarray(QBN.multiply(QBN) @ qinv).ravel()
        W = (AB - AN @ sp.diags(qinv) @ QBN.T).tocsc()
        D = np.asarray(AN.multiply(AN) @ qinv).ravel() + plan.delta_d
    else:
        qinv = np.zeros(0)
        QBN = sp.csc_matrix((len(B), 0))
        AN = sp.csc_matrix((m, 0))
        S_diag = np.zeros(len(B))
        W = AB.tocsc()
        D = np.full(m, plan.delta_d)
    hdiag = 1.0 / theta[B] + plan.delta_pB - S_diag
    H = QB + sp.diags(hdiag)
    K = sp.bmat([[-H, None], [W, sp.diags(D)]], format="csc")
    signs = np.r_[-np.ones(len(B), dtype=np.int64), np.ones(m, dtype=np.int64)]
    return QPSystem(from_scipy(K, symmetric=True), signs, part,
                    plan.qbar if part.n1 else np.zeros(0), W, QBN.tocsc(), AN.tocsc(), hdiag, D)


def qp_regularizers(A: SparseMatrix, Q: SparseMatrix, theta: np.ndarray,
                    plan: RegPlan) -> tuple[np.ndarray, np.ndarray]:
    """Explicit dense (R_p, R_d) in the original column order.

    R_pN = Δ_pN I − off(Q_N), R_pB = Δ_pB I + off(Q_BN Q̄_N⁻¹ Q_BNᵀ),
    R_d = δ_d I − off(A_N Q̄_N⁻¹ A_Nᵀ); uniform mode gives scalar multiples of I.
    """
    n, m = A.ncols, A.nrows
    Rp = plan.delta_pB * np.eye(n)
    Rd = plan.delta_d * np.eye(m)
    if plan.nondiag_active:
        N, B = plan.partition.N, plan.partition.B
        Qd = Q.toarray()
        Ad = A.toarray()
        qinv = 1.0 / plan.qbar
        QN = Qd[np.ix_(N, N)]
        RpN = plan.delta_pN * np.eye(len(N)) - (QN - np.diag(np.diag(QN)))
        QBN = Qd[np.ix_(B, N)]
        S = (QBN * qinv) @ QBN.T
        RpB = plan.delta_pB * np.eye(len(B)) + (S - np.diag(np.diag(S)))
        Rp = np.zeros((n, n))
        Rp[np.ix_(N, N)] = RpN
        Rp[np.ix_(B, B)] = RpB
        AN = Ad[:, N]
        T = (AN * qinv) @ AN.T
        Rd = plan.delta_d * np.eye(m) - (T - np.diag(np.diag(T)))
    return Rp, Rd
