"""Infeasible primal-dual interior point method with dynamic regularization.

No predictor-corrector: one Newton direction per iteration, the centring
parameter chosen from the previous step lengths, and separate primal and
dual fraction-to-boundary steps.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .factor import (FactorizationFailure, LdlFactor, cholesky, ldlt_quasidefinite,
                     minimum_degree, restrict_ordering, solve as factor_solve)
from .regularizer import (Mode, ProblemNorms, RegPlan, RegSchedule, build_lp_normal_matrix,
                          build_qp_reduced_system, clamp_theta, escalate, initial_schedule,
                          lp_dual_regularizer, make_plan, problem_norms, qp_regularizers,
                          update_schedule)
from .sparse import SparseMatrix, aat_product, from_scipy, inf_norm_sym
from .standard import BoxPolicy, StandardQP, expand_free_boxes, transfer_point

OPTIMAL = "optimal"
ITERATION_LIMIT = "iteration-limit"
STALLED = "factorization-stalled"


@dataclass(frozen=True)
class SolverOptions:
    mode: Mode = Mode.NONDIAG
    tol: float | None = None          # None: 1e-6 for LP, 1e-8 for QP
    maxit: int = 200
    sigma0: float = 0.5
    tau: float = 0.995
    max_retries: int = 6
    box_policy: BoxPolicy = BoxPolicy()


@dataclass
class IterateState:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    r: np.ndarray
    s: np.ndarray
    k: int = 0
    ax: float = 1.0
    az: float = 1.0

    @property
    def mu(self) -> float:
        return float(self.x @ self.z) / len(self.x)

    def copy(self) -> "IterateState":
        return IterateState(self.x.copy(), self.y.copy(), self.z.copy(), self.r.copy(),
                            self.s.copy(), self.k, self.ax, self.az)


@dataclass(frozen=True)
class Residuals:
    primal: np.ndarray
    dual: np.ndarray
    mu: float


@dataclass(frozen=True)
class Direction:
    dx: np.ndarray
    dr: np.ndarray
    ds: np.ndarray
    dy: np.ndarray
    dz: np.ndarray


@dataclass(frozen=True)
class IterationRecord:
    k: int
    mu: float
    res_p: float
    res_d: float
    n_N: int
    reg_thr: float
    delta_d: float
    sigma: float
    ax: float
    az: float
    fact_seconds: float
    nnz_matrix: int
    nnz_factor: int
    retries: int


@dataclass
class SolveReport:
    name: str
    mode: str
    status: str
    iterations: int
    objective: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    res_p: float
    res_d: float
    mu: float
    seconds: float
    records: list[IterationRecord] = field(default_factory=list)
    problem: StandardQP | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def x_original(self) -> np.ndarray:
        return self.problem.recover(self.x)


@dataclass(frozen=True)
class Snapshot:
    """What one iteration used; handed to the optional per-iteration callback."""

    problem: StandardQP
    state: IterateState
    theta: np.ndarray
    sigma: float
    plan: RegPlan
    sched: RegSchedule
    direction: Direction
    matrix: SparseMatrix
    factor: LdlFactor


# -- pieces -------------------------------------------------------------------

def residuals(problem: StandardQP, state: IterateState) -> Residuals:
    A = problem.A.csc
    Qx = problem.Q.full() @ state.x
    return Residuals(problem.b - A @ state.x,
                     problem.c - A.T @ state.y - state.z + Qx,
                     state.mu)


def centring_sigma(ax: float, az: float) -> float:
    return float(np.clip(max((1.0 - ax) ** 5, (1.0 - az) ** 5), 0.05, 0.95))


def step_lengths(state: IterateState, d: Direction, tau: float = 0.995) -> tuple[float, float]:
    def ratio(v, dv):
        neg = dv < 0
        if not np.any(neg):
            return 1.0
        with np.errstate(over="ignore"):     # tiny |dv| gives inf, which min() drops
            return min(1.0, float(np.min(-v[neg] / dv[neg])))
    return tau * ratio(state.x, d.dx), tau * ratio(state.z, d.dz)


def _solve_aat(A: sp.csc_matrix, rhs: np.ndarray, perm) -> np.ndarray:
    M = aat_product(from_scipy(A))
    try:
        f = cholesky(M, perm)
    except FactorizationFailure:
        ridge = 1e-8 * max(inf_norm_sym(M), 1.0)
        M = from_scipy(M.csc + ridge * sp.identity(M.nrows, format="csc"), symmetric=True)
        f = cholesky(M, perm)
    return factor_solve(f, rhs)


def initial_point(problem: StandardQP, perm=None) -> IterateState:
    """Closed-form solution of the problem without x ≥ 0, shifted into the interior."""
    A = problem.A.csc
    Qf = problem.Q.full()
    m, n = A.shape
    if m:
        xt = A.T @ _solve_aat(A, problem.b, perm)
        yt = _solve_aat(A, A @ (problem.c + Qf @ xt), perm)
    else:
        xt = np.zeros(n)
        yt = np.zeros(0)
    zt = problem.c - A.T @ yt + Qf @ xt
    dx = max(-1.5 * float(xt.min()), 0.0)
    dz = max(-1.5 * float(zt.min()), 0.0)
    xs, zs = xt + dx, zt + dz
    prod = float(xs @ zs)
    sz, sx = float(zs.sum()), float(xs.sum())
    dxt = dx + 0.5 * prod / sz if sz > 0 else dx + 1.0
    dzt = dz + 0.5 * prod / sx if sx > 0 else dz + 1.0
    x0, z0 = xt + dxt, zt + dzt
    if x0.min() <= 0:
        x0 = xt + dx + 1.0
    if z0.min() <= 0:
        z0 = zt + dz + 1.0
    return IterateState(x0, yt, z0, np.zeros(m), np.zeros(n))


def newton_step_lp(problem: StandardQP, state: IterateState, theta: np.ndarray,
                   sigma: float, plan: RegPlan, perm) -> tuple[Direction, SparseMatrix, LdlFactor, float]:
    A = problem.A.csc
    x, y, z = state.x, state.y, state.z
    mu = state.mu
    xi_d = problem.c - A.T @ y - sigma * mu / x
    xi_p = problem.b - A @ x
    K = build_lp_normal_matrix(problem.A, theta, plan)
    t0 = time.perf_counter_ns()
    f = cholesky(K, perm)
    secs = (time.perf_counter_ns() - t0) * 1e-9
    dy = factor_solve(f, xi_p + A @ (theta * xi_d))
    dx = theta * (A.T @ dy - xi_d)
    dz = -z / x * dx - z + sigma * mu / x
    dr = dy - state.r if plan.regularized else np.zeros_like(dy)
    return Direction(dx, dr, np.zeros_like(dx), dy, dz), K, f, secs


def newton_step_qp(problem: StandardQP, state: IterateState, theta: np.ndarray,
                   sigma: float, plan: RegPlan, order) -> tuple[Direction, SparseMatrix, LdlFactor, float]:
    A = problem.A.csc
    Qf = problem.Q.full()
    m, n = A.shape
    x, y, z = state.x, state.y, state.z
    mu = state.mu
    sysm = build_qp_reduced_system(problem.A, problem.Q, theta, plan)
    N, B = plan.partition.N, plan.partition.B
    xi_d = problem.c + Qf @ x - A.T @ y - sigma * mu / x
    xi_p = problem.b - A @ x
    if len(N):
        qinv = 1.0 / sysm.qbar
        t = qinv * xi_d[N]
        rhs = np.r_[xi_d[B] - sysm.QBN @ t, xi_p + sysm.AN @ t]
    else:
        rhs = np.r_[xi_d[B], xi_p]
    perm = None
    if order is not None:
        perm = restrict_ordering(order, np.r_[B, n + np.arange(m)])
    t0 = time.perf_counter_ns()
    f = ldlt_quasidefinite(sysm.matrix, sysm.signs, perm)
    secs = (time.perf_counter_ns() - t0) * 1e-9
    sol = factor_solve(f, rhs)
    dx = np.empty(n)
    dx[B] = sol[:len(B)]
    dy = sol[len(B):]
    if len(N):
        dx[N] = qinv * (sysm.AN.T @ dy - sysm.QBN.T @ dx[B] - xi_d[N])
    dz = -z / x * dx - z + sigma * mu / x
    dr = dy - state.r if plan.regularized else np.zeros(m)
    ds = dx - state.s if plan.regularized else np.zeros(n)
    return Direction(dx, dr, ds, dy, dz), sysm.matrix, f, secs


def explicit_regularizers(problem: StandardQP, theta: np.ndarray,
                          plan: RegPlan) -> tuple[np.ndarray, np.ndarray]:
    """Dense (R_p, R_d) that the implicit construction stands for."""
    if problem.is_lp:
        return np.zeros((problem.n, problem.n)), lp_dual_regularizer(problem.A, theta, plan)
    return qp_regularizers(problem.A, problem.Q, theta, plan)


def newton_system_residual(problem: StandardQP, state: IterateState, d: Direction,
                           sigma: float, Rp: np.ndarray, Rd: np.ndarray) -> float:
    """Normwise backward error of the direction in the full 5-block Newton system
    (with x̃ = x_k, ỹ = y_k).

    F is itself evaluated at the iterate w, so w counts as data:
    ‖JΔw + F‖∞ / (‖J‖∞(‖Δw‖∞ + ‖w‖∞) + ‖b‖∞ + ‖c‖∞).
    """
    A = problem.A.toarray()
    Q = problem.Q.toarray()
    m, n = A.shape
    x, y, z, r, s = state.x, state.y, state.z, state.r, state.s
    I, Zm = np.eye(n), np.zeros
    J = np.block([
        [Q, Zm((n, m)), Rp, -A.T, -I],
        [Zm((m, n)), Rd, Zm((m, n)), -Rd, Zm((m, n))],
        [Rp, Zm((n, m)), -Rp, Zm((n, m)), Zm((n, n))],
        [A, Rd, Zm((m, n)), Zm((m, m)), Zm((m, n))],
        [np.diag(z), Zm((n, m)), Zm((n, n)), Zm((n, m)), np.diag(x)],
    ])
    F = np.r_[problem.c + Q @ x + Rp @ s - A.T @ y - z,
              Rd @ r,
              -Rp @ s,
              A @ x + Rd @ r - problem.b,
              x * z - sigma * state.mu]
    w = np.r_[d.dx, d.dr, d.ds, d.dy, d.dz]
    res = J @ w + F
    wk = np.r_[x, r, s, y, z]
    data = np.abs(problem.b).max(initial=0.0) + np.abs(problem.c).max(initial=0.0)
    denom = np.abs(J).sum(axis=1).max() * (np.abs(w).max() + np.abs(wk).max()) + data
    return float(np.abs(res).max() / denom) if denom > 0 else 0.0


# -- driver -----------------------------------------------------------------

def _orderings(problem: StandardQP):
    A = problem.A
    m, n = A.shape
    if problem.is_lp:
        pat = aat_product(A)
        pat = from_scipy(pat.csc + sp.identity(m, format="csc"), symmetric=True)
        return minimum_degree(pat)
    Qf = problem.Q.full()
    full = sp.bmat([[abs(Qf) + sp.identity(n), None], [abs(A.csc), sp.identity(m)]], format="csc")
    return minimum_degree(from_scipy(full, symmetric=True))


def solve(problem: StandardQP, options: SolverOptions = SolverOptions(),
          callback: Callable[[Snapshot], None] | None = None) -> SolveReport:
    t_start = time.perf_counter()
    mode = Mode(options.mode)
    is_lp = problem.is_lp
    tol = options.tol if options.tol is not None else (1e-6 if is_lp else 1e-8)
    norms: ProblemNorms = problem_norms(problem.A, None if is_lp else problem.Q)
    order = _orderings(problem)
    lp_perm = order if is_lp else None
    sched = initial_schedule(tol, norms.norm_A2)
    state = initial_point(problem, lp_perm if is_lp else None)
    records: list[IterationRecord] = []
    status = ITERATION_LIMIT
    mu_prev = None

    while True:
        res = residuals(problem, state)
        mu = res.mu
        rp = float(np.linalg.norm(res.primal)) / (np.linalg.norm(problem.b) + 1)
        rd = float(np.linalg.norm(res.dual)) / (np.linalg.norm(problem.c) + 1)
        if rp <= tol and rd <= tol and mu <= tol:
            status = OPTIMAL
            break
        if state.k >= options.maxit or not (np.isfinite(mu) and mu > 0):
            break
        if mu_prev is not None:
            sched = update_schedule(sched, mu_prev, mu)
        sigma = options.sigma0 if state.k == 0 else centring_sigma(state.ax, state.az)
        theta = clamp_theta(state.x / state.z)

        step = None
        retries = 0
        while True:
            plan = make_plan(mode, problem.A, None if is_lp else problem.Q, theta, sched, norms)
            try:
                if is_lp:
                    step = newton_step_lp(problem, state, theta, sigma, plan, lp_perm)
                else:
                    step = newton_step_qp(problem, state, theta, sigma, plan, order)
                break
            except FactorizationFailure:
                if mode == Mode.NONE or retries >= options.max_retries:
                    break
                retries += 1
                sched = escalate(sched)
        if step is None:
            status = STALLED
            break
        d, K, f, secs = step
        if callback is not None:
            callback(Snapshot(problem, state.copy(), theta, sigma, plan, sched, d, K, f))
        ax, az = step_lengths(state, d, options.tau)
        records.append(IterationRecord(state.k, mu, rp, rd, plan.partition.n1, sched.reg_thr,
                                       plan.delta_d, sigma, ax, az, secs, K.nnz, f.nnz, retries))
        state = IterateState(state.x + ax * d.dx, state.y + az * d.dy, state.z + az * d.dz,
                             state.r + ax * d.dr, state.s + az * d.ds, state.k + 1, ax, az)
        mu_prev = mu
        if problem.free_boxes:
            wider, changed = expand_free_boxes(problem, state.x, options.box_policy)
            if changed:
                state.x = transfer_point(problem, wider, state.x)
                problem = wider

    res = residuals(problem, state)
    return SolveReport(
        name=problem.name, mode=mode.value, status=status, iterations=state.k,
        objective=problem.objective(state.x), x=state.x, y=state.y, z=state.z,
        res_p=float(np.linalg.norm(res.primal)), res_d=float(np.linalg.norm(res.dual)),
        mu=res.mu, seconds=time.perf_counter() - t_start, records=records, problem=problem)
