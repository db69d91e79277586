"""Dense-oracle checks of the spectral claims behind the regularization.

Everything here is post-hoc: certificates read solver snapshots (or
synthetic instances) and never feed back into the solver.  The oracle is a
cyclic Jacobi eigen-solver, so the checks do not share code with LAPACK.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy.linalg import null_space

JACOBI_MAX_DIM = 400
SLACK_REL = 1e-10
CLUSTER_GAP = 1e-9


class DimensionError(ValueError):
    pass


# -- the oracle ---------------------------------------------------------------

@numba.njit(cache=True)
def _jacobi(a, v, vectors, max_sweeps):
    n = a.shape[0]
    frob = 0.0
    for i in range(n):
        for j in range(n):
            frob += a[i, j] * a[i, j]
    if frob == 0.0:
        return 0
    target = (1e-17 ** 2) * frob
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        if off <= target:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                # skip rotations that cannot change the diagonal in floating point
                if abs(apq) < 1e-18 * math.sqrt(abs(app * aqq)) and sweep > 3:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                if vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * vkq
                        v[k, q] = s * vkp + c * vkq
    return max_sweeps


def dense_symmetric_eig(M, vectors: bool = True, max_sweeps: int = 60):
    """Eigenvalues (ascending) and, optionally, orthonormal eigenvectors by cyclic Jacobi."""
    M = np.array(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("square matrix expected")
    n = M.shape[0]
    if n > JACOBI_MAX_DIM:
        raise DimensionError(f"dimension {n} exceeds the dense oracle cap {JACOBI_MAX_DIM}")
    a = 0.5 * (M + M.T)
    v = np.eye(n)
    _jacobi(a, v, vectors, max_sweeps)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]


def dense_eigvals(M) -> np.ndarray:
    return dense_symmetric_eig(M, vectors=False)


class _EigMemo:
    """Eigenvalues keyed by matrix content, for checks that revisit a matrix."""

    def __init__(self):
        self._store: dict = {}

    def __call__(self, M: np.ndarray) -> np.ndarray:
        key = (M.shape, hash(np.ascontiguousarray(M).tobytes()))
        if key not in self._store:
            self._store[key] = dense_eigvals(M)
        return self._store[key]


def _inertia(M: np.ndarray, w: np.ndarray) -> tuple[int, int, int]:
    """Inertia from w when no eigenvalue sits inside the oracle's error band,
    otherwise from the scaled matrix."""
    band = 1e-12 * len(w) * (1.0 + float(np.abs(M).sum(axis=1).max(initial=0.0)))
    if len(w) and np.abs(w).min() > band:
        return int(np.sum(w < 0)), int(np.sum(w > 0)), 0
    return scaled_inertia(M)


def singular_extremes(A: np.ndarray) -> tuple[float, float]:
    """(σ_max, σ_min) of a wide or square matrix via the eigenvalues of AAᵀ.

    σ_min is the m-th singular value (zero when rank(A) < m).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return 0.0, 0.0
    G = A @ A.T if A.shape[0] <= A.shape[1] else A.T @ A
    w = dense_eigvals(G)
    smax = math.sqrt(max(w[-1], 0.0))
    smin = math.sqrt(max(w[0], 0.0)) if A.shape[0] <= A.shape[1] else 0.0
    return smax, smin


def scaled_inertia(M: np.ndarray, tol: float = 0.0) -> tuple[int, int, int]:
    """Inertia from the eigenvalues of D^{-1/2} M D^{-1/2}, D = |diag(M)|.

    Congruence keeps the inertia (Sylvester) while the scaling tames the
    spread between Θ⁻¹ entries and regularization-sized entries.
    """
    d = np.abs(np.diag(M)).copy()
    d[d == 0] = 1.0
    s = 1.0 / np.sqrt(d)
    w = dense_eigvals(M * s[:, None] * s[None, :])
    return int(np.sum(w < -tol)), int(np.sum(w > tol)), int(np.sum(np.abs(w) <= tol))


# -- certificates -------------------------------------------------------------

@dataclass(frozen=True)
class BoundRecord:
    name: str
    relation: str       # "<", "<=", ">", ">=", "=="
    bound: float
    observed: float
    passed: bool
    note: str = ""

    @property
    def skipped(self) -> bool:
        return self.note.startswith("skipped")


def _check(name, observed, relation, bound, slack=0.0, note="") -> BoundRecord:
    observed, bound = float(observed), float(bound)
    if relation == "<":
        ok = observed < bound + slack
    elif relation == "<=":
        ok = observed <= bound + slack
    elif relation == ">":
        ok = observed > bound - slack
    elif relation == ">=":
        ok = observed >= bound - slack
    elif relation == "==":
        ok = observed == bound
    else:
        raise ValueError(relation)
    return BoundRecord(name, relation, bound, observed, bool(ok), note)


@dataclass
class SpectralCertificate:
    label: str
    eigenvalues: np.ndarray
    inertia: tuple[int, int, int]
    expected_inertia: tuple[int, int, int]
    records: list[BoundRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.inertia == self.expected_inertia and all(r.passed for r in self.records)

    def failures(self) -> list[BoundRecord]:
        out = [r for r in self.records if not r.passed]
        if self.inertia != self.expected_inertia:
            out.append(BoundRecord("inertia", "==", 0, 0, False,
                                   f"{self.inertia} != {self.expected_inertia}"))
        return out

    def json_lines(self, extra: dict | None = None) -> list[str]:
        """One JSON record per bound, plus one for the inertia."""
        base = {"label": self.label, **(extra or {})}
        rows = [{**base, "name": "inertia", "observed": list(self.inertia),
                 "expected": list(self.expected_inertia),
                 "passed": self.inertia == self.expected_inertia}]
        rows += [{**base, **asdict(r)} for r in self.records]
        return [json.dumps(r) for r in rows]


def _slack(M: np.ndarray) -> float:
    return SLACK_REL * (1.0 + float(np.abs(M).sum(axis=1).max(initial=0.0)))


def _saddle_bounds(w, n_neg, lam_min_11, lam_max_11, d_min, d_upper, smax, smin, slack,
                   upper_is_two_delta: bool):
    """The four eigenvalue bounds shared by every saddle-point certificate.

    (1,1) block is −H with H ≻ 0, (2,2) block is positive definite with
    lower value d_min; d_upper is δ_d (bound ½(2δ+√(4δ²+4σ²))) or max D*.
    """
    neg, pos = w[:n_neg], w[n_neg:]
    recs = []
    if len(neg):
        recs.append(_check("largest negative", neg[-1], "<", -lam_min_11, slack))
        lo = 0.5 * ((d_min - lam_max_11) - math.sqrt((lam_max_11 + d_min) ** 2 + 4 * smax ** 2))
        recs.append(_check("most negative", neg[0], ">=", lo, slack))
    if len(pos):
        if upper_is_two_delta:
            hi = 0.5 * (2 * d_upper + math.sqrt(4 * d_upper ** 2 + 4 * smax ** 2))
        else:
            hi = 0.5 * (d_upper + math.sqrt(d_upper ** 2 + 4 * smax ** 2))
        recs.append(_check("largest positive", pos[-1], "<=", hi, slack))
        lo1 = 0.5 * ((d_min - lam_max_11) + math.sqrt((lam_max_11 + d_min) ** 2 + 4 * smin ** 2))
        recs.append(_check("smallest positive", pos[0], ">=", lo1, slack))
    return recs


def _null_space_clause(V, n_first, C, R, tol=1e-8) -> BoundRecord:
    """rank(C) < m ⇒ m − rank(C) eigenvectors of the form (0, p) with Cᵀp = 0.

    The claim needs Null(Cᵀ) to be invariant under the (2,2) block R, which
    holds when R is uniform on it. When it is not, the clause is recorded as
    skipped rather than judged.
    """
    m = C.shape[0]
    Z = null_space(C.T) if C.size else np.eye(m)
    want = Z.shape[1]
    rank = m - want
    RZ = R @ Z
    drift = np.linalg.norm(RZ - Z @ (Z.T @ RZ))
    if drift > tol * (1.0 + np.abs(R).sum(axis=1).max(initial=0.0)):
        return BoundRecord("null-space eigenvectors", "==", want, float("nan"), True,
                           f"skipped: Null(Cᵀ) not invariant under the (2,2) block "
                           f"(drift {drift:.2e}); rank {rank} of {m}")
    u_norm = np.linalg.norm(V[:n_first, :], axis=0)
    hits = np.flatnonzero(u_norm <= tol)
    scale = max(1.0, float(np.abs(C).max(initial=0.0)))
    in_null = [np.linalg.norm(C.T @ V[n_first:, j]) <= tol * scale for j in hits]
    count = int(sum(in_null))
    return _check("null-space eigenvectors", count, "==", want,
                  note=f"rank {rank} of {m}")


def certify_lp_augmented(A, theta, Rd, delta_d: float, label: str = "lp-augmented",
                         rank_clause: bool = True, memo=dense_eigvals) -> SpectralCertificate:
    """[[−Θ⁻¹, Aᵀ], [A, R_d]]: inertia (n, m) and the four bounds."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    tinv = 1.0 / np.asarray(theta, dtype=float)
    M = np.block([[-np.diag(tinv), A.T], [A, Rd]])
    deficient = rank_clause and m and np.linalg.matrix_rank(A) < m
    w, V = dense_symmetric_eig(M) if deficient else (memo(M), None)
    smax, smin = singular_extremes(A)
    rd_min = float(dense_eigvals(Rd)[0]) if m else 0.0
    slack = _slack(M)
    recs = _saddle_bounds(w, n, tinv.min(), tinv.max(), rd_min, delta_d, smax, smin, slack, True)
    if deficient:
        recs.append(_null_space_clause(V, n, A, Rd))
    return SpectralCertificate(label, w, _inertia(M, w), (n, m, 0), recs)


def certify_lp_reduced(AB, theta_B, dstar, delta_d: float, label: str = "lp-reduced",
                       rank_clause: bool = True, memo=dense_eigvals) -> SpectralCertificate:
    """[[−Θ_B⁻¹, A_Bᵀ], [A_B, D*]] with diagonal D*: inertia (n₂, m) and the bounds."""
    AB = np.atleast_2d(np.asarray(AB, dtype=float))
    dstar = np.asarray(dstar, dtype=float)
    m = len(dstar)
    AB = AB.reshape(m, -1)
    n2 = AB.shape[1]
    tinv = 1.0 / np.asarray(theta_B, dtype=float)
    M = np.block([[-np.diag(tinv), AB.T], [AB, np.diag(dstar)]])
    deficient = rank_clause and m and (n2 < m or np.linalg.matrix_rank(AB) < m)
    w, V = dense_symmetric_eig(M) if deficient else (memo(M), None)
    smax, smin = singular_extremes(AB)
    slack = _slack(M)
    recs = _saddle_bounds(w, n2, tinv.min(initial=np.inf), tinv.max(initial=0.0),
                          dstar.min(), dstar.max(), smax, smin, slack, False)
    recs.append(_check("min D* vs delta_d", dstar.min(), ">=", delta_d, slack))
    if n2 < len(w):
        recs.append(_check("smallest positive vs delta_d", w[n2], ">=", delta_d, slack))
    if deficient:
        recs.append(_null_space_clause(V, n2, AB, np.diag(dstar)))
    return SpectralCertificate(label, w, _inertia(M, w), (n2, m, 0), recs)


def certify_qp_augmented(A, Q, theta, Rp, Rd, delta_d: float, label: str = "qp-augmented",
                         rank_clause: bool = True, memo=dense_eigvals) -> SpectralCertificate:
    """[[−H, Aᵀ], [A, R_d]] with H = Q + Θ⁻¹ + R_p."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    H = np.asarray(Q, dtype=float) + np.diag(1.0 / np.asarray(theta, dtype=float)) + Rp
    M = np.block([[-H, A.T], [A, Rd]])
    deficient = rank_clause and m and np.linalg.matrix_rank(A) < m
    w, V = dense_symmetric_eig(M) if deficient else (memo(M), None)
    h = dense_eigvals(H)
    smax, smin = singular_extremes(A)
    rd_min = float(dense_eigvals(Rd)[0]) if m else 0.0
    slack = _slack(M)
    recs = _saddle_bounds(w, n, h[0], h[-1], rd_min, delta_d, smax, smin, slack, True)
    if deficient:
        recs.append(_null_space_clause(V, n, A, Rd))
    return SpectralCertificate(label, w, _inertia(M, w), (n, m, 0), recs)


def certify_qp_reduced(Hbar, W, dstar, delta_d: float, label: str = "qp-reduced",
                       rank_clause: bool = True, memo=dense_eigvals) -> SpectralCertificate:
    """[[−H̄, Wᵀ], [W, D*]] with W = A_B − A_N Q̄_N⁻¹ Q_BNᵀ and diagonal D*."""
    Hbar = np.atleast_2d(np.asarray(Hbar, dtype=float))
    dstar = np.asarray(dstar, dtype=float)
    m = len(dstar)
    n2 = Hbar.shape[0] if Hbar.size else 0
    Hbar = Hbar.reshape(n2, n2)
    W = np.asarray(W, dtype=float).reshape(m, n2)
    M = np.block([[-Hbar, W.T], [W, np.diag(dstar)]])
    deficient = rank_clause and m and (n2 < m or np.linalg.matrix_rank(W) < m)
    w, V = dense_symmetric_eig(M) if deficient else (memo(M), None)
    h = dense_eigvals(Hbar) if n2 else np.array([np.inf, 0.0])
    smax, smin = singular_extremes(W)
    slack = _slack(M)
    recs = _saddle_bounds(w, n2, h[0], h[-1], dstar.min(), dstar.max(), smax, smin, slack, False)
    recs.append(_check("min D* vs delta_d", dstar.min(), ">=", delta_d, slack))
    if n2 < len(w):
        recs.append(_check("smallest positive vs delta_d", w[n2], ">=", delta_d, slack))
    if deficient:
        recs.append(_null_space_clause(V, n2, W, np.diag(dstar)))
    return SpectralCertificate(label, w, _inertia(M, w), (n2, m, 0), recs)


# -- Gershgorin enclosures ----------------------------------------------------

@dataclass(frozen=True)
class GershgorinReport:
    label: str
    eigenvalues: np.ndarray
    radii: np.ndarray
    delta: float
    lower: float
    records: list[BoundRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)


def gershgorin_certify(R, delta: float, absorbed, label: str = "R_d",
                       strict_lower: bool = False) -> GershgorinReport:
    """Eigenvalues of R = δI ∓ off(P) lie in [min positive diag(P), δ + r_i] ⊂ (·, 2δ).

    ``absorbed`` is the matrix P whose off-diagonal part was moved into R;
    its positive diagonal entries give the stated lower bound (δ when P has
    none).  ``strict_lower`` asks for λ > lower instead of λ ≥ lower.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    P = np.atleast_2d(np.asarray(absorbed, dtype=float))
    off = np.abs(R - np.diag(np.diag(R)))
    radii = off.sum(axis=1)
    w = dense_eigvals(R)
    pd = np.diag(P)
    pd = pd[pd > 0]
    lower = float(pd.min()) if len(pd) else delta
    tiny = 1e-14 * max(1.0, abs(delta))
    recs = [
        _check("below 2 delta", w[-1], "<", 2 * delta),
        _check("below delta + r_i", w[-1], "<=", delta + radii.max(initial=0.0), tiny),
        _check("above stated minimum", w[0], ">" if strict_lower else ">=", lower, tiny),
        _check("positive", w[0], ">", 0.0),
    ]
    return GershgorinReport(label, w, radii, delta, lower, recs)


# -- perturbation bounds -----------------------------------------------------

@dataclass(frozen=True)
class PerturbationReport:
    checked: int
    skipped_small: int
    skipped_clustered: int
    worst_ratio: float          # max |λ−λ̃| / bound over checked pairs
    records: list[BoundRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)


def _clustered(w: np.ndarray) -> np.ndarray:
    gap = np.full(len(w), np.inf)
    if len(w) > 1:
        d = np.diff(w)
        gap[:-1] = np.minimum(gap[:-1], d)
        gap[1:] = np.minimum(gap[1:], d)
    return gap < CLUSTER_GAP


def _resolution(a: float, b: float) -> float:
    # a difference below a few ulps of the eigenvalues themselves is not measurable
    return 8 * np.finfo(float).eps * max(abs(a), abs(b))


def perturbation_certify_lp(A, theta, delta_d: float, slack: float = 1e-10) -> PerturbationReport:
    """|λᵢ − λ̃ᵢ| ≤ ‖E‖φᵢ² for M = [[−Θ⁻¹, Aᵀ], [A, 0]], E = blkdiag(0, δ_d I), |λᵢ| > 2‖E‖."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    M = np.block([[-np.diag(1.0 / np.asarray(theta, dtype=float)), A.T], [A, np.zeros((m, m))]])
    E = np.zeros_like(M)
    E[n:, n:] = delta_d * np.eye(m)
    w = dense_eigvals(M)
    wt = dense_eigvals(M + E)
    normE = delta_d
    normA = singular_extremes(A)[0]
    clustered = _clustered(w)
    recs = []
    small = clus = 0
    worst = 0.0
    for i, lam in enumerate(w):
        if abs(lam) <= 2 * normE:
            small += 1
            continue
        if clustered[i]:
            clus += 1
            continue
        phi2 = normA ** 2 / ((abs(lam) - 2 * normE) ** 2 + normA ** 2) if normA else 0.0
        bound = normE * phi2
        diff = abs(lam - wt[i])
        worst = max(worst, diff / bound if bound > 0 else (0.0 if diff == 0 else np.inf))
        recs.append(_check(f"pair {i}", diff, "<=", bound, slack + _resolution(lam, wt[i])))
    return PerturbationReport(len(recs), small, clus, worst, recs)


def perturbation_certify_qp(A, Q, theta, delta_pN: float, delta_pB: float, N, delta_d: float,
                            slack: float = 1e-10) -> PerturbationReport:
    """|λᵢ − λ̃ᵢ| ≤ ‖Δ_p‖𝜑ᵢ² + δ_dφᵢ² for M = [[−Q−Θ⁻¹, Aᵀ], [A, 0]],
    E = blkdiag(Δ_p, δ_d I), Δ_p = δ_pN on N and δ_pB elsewhere.

    Qualifying i: |λᵢ| > δ_d + ‖E‖ and ζᵢ > ‖Δ_p‖ + ‖E‖ with
    ζᵢ = min over μ ∈ λ(−Q−Θ⁻¹) of |λᵢ − μ|.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    G = -np.asarray(Q, dtype=float) - np.diag(1.0 / np.asarray(theta, dtype=float))
    M = np.block([[G, A.T], [A, np.zeros((m, m))]])
    dp = np.full(n, delta_pB)
    dp[np.asarray(N, dtype=np.int64)] = delta_pN
    E = np.zeros_like(M)
    E[:n, :n] = np.diag(dp)
    E[n:, n:] = delta_d * np.eye(m)
    w = dense_eigvals(M)
    wt = dense_eigvals(M + E)
    g = dense_eigvals(G)
    normDp = float(dp.max(initial=0.0))
    normE = max(normDp, delta_d)
    normA = singular_extremes(A)[0]
    clustered = _clustered(w)
    recs = []
    small = clus = 0
    worst = 0.0
    for i, lam in enumerate(w):
        zeta = float(np.min(np.abs(lam - g)))
        if lam == 0 or abs(lam) <= delta_d + normE or zeta <= normDp + normE:
            small += 1
            continue
        if clustered[i]:
            clus += 1
            continue
        phi2 = normA ** 2 / ((abs(lam) - delta_d - normE) ** 2 + normA ** 2) if normA else 0.0
        vphi2 = normA ** 2 / ((zeta - normDp - normE) ** 2 + normA ** 2) if normA else 0.0
        bound = normDp * vphi2 + delta_d * phi2
        diff = abs(lam - wt[i])
        worst = max(worst, diff / bound if bound > 0 else (0.0 if diff == 0 else np.inf))
        recs.append(_check(f"pair {i}", diff, "<=", bound, slack + _resolution(lam, wt[i])))
    return PerturbationReport(len(recs), small, clus, worst, recs)


# -- spectral radius ----------------------------------------------------------

@dataclass(frozen=True)
class RadiusReport:
    rho: float
    margin: float
    backend: str

    @property
    def passed(self) -> bool:
        return self.rho < 1.0 - self.margin


def spectral_radius_certify(K, R, margin: float = 1e-12, backend: str = "jacobi") -> RadiusReport:
    """max |λ| over uᵀRu = λ uᵀKu, K ≻ 0, via eig(L⁻¹RL⁻ᵀ) with K = LLᵀ.

    ``backend="lapack"`` swaps the Jacobi oracle for numpy's eigvalsh, for
    systems past the oracle's dimension cap.
    """
    K = np.asarray(K, dtype=float)
    R = np.asarray(R, dtype=float)
    L = np.linalg.cholesky(K)
    X = np.linalg.solve(L, R)
    C = np.linalg.solve(L, X.T).T
    C = 0.5 * (C + C.T)
    if backend == "jacobi":
        w = dense_eigvals(C)
    elif backend == "lapack":
        w = np.linalg.eigvalsh(C)
    else:
        raise ValueError(backend)
    return RadiusReport(float(np.abs(w).max(initial=0.0)), margin, backend)


# -- solver snapshots ---------------------------------------------------------

@dataclass
class IterationCertificate:
    """All checks run on one solver iteration."""

    problem: str
    k: int
    mode: str
    n_N: int
    certificates: list[SpectralCertificate]
    gershgorin: list[GershgorinReport]
    radius: RadiusReport | None
    ldlt_inertia: tuple[int, int, int] | None
    ldlt_expected: tuple[int, int, int] | None

    @property
    def inertia_passed(self) -> bool:
        ok = all(c.inertia == c.expected_inertia for c in self.certificates)
        return ok and self.ldlt_inertia == self.ldlt_expected

    @property
    def bounds_passed(self) -> bool:
        return (all(r.passed for c in self.certificates for r in c.records)
                and all(g.passed for g in self.gershgorin))

    @property
    def passed(self) -> bool:
        return (self.inertia_passed and self.bounds_passed
                and (self.radius is None or self.radius.passed))

    def json_lines(self) -> list[str]:
        extra = {"problem": self.problem, "k": self.k, "mode": self.mode, "n_N": self.n_N}
        out = []
        for c in self.certificates:
            out += c.json_lines(extra)
        for g in self.gershgorin:
            out += [json.dumps({**extra, "label": f"gershgorin {g.label}", **asdict(r)})
                    for r in g.records]
        if self.radius is not None:
            out.append(json.dumps({**extra, "label": "spectral radius", "name": "rho",
                                   "relation": "<", "bound": 1.0 - self.radius.margin,
                                   "observed": self.radius.rho, "passed": self.radius.passed}))
        if self.ldlt_expected is not None:
            out.append(json.dumps({**extra, "label": "ldlt", "name": "inertia",
                                   "observed": list(self.ldlt_inertia or ()),
                                   "expected": list(self.ldlt_expected),
                                   "passed": self.ldlt_inertia == self.ldlt_expected}))
        return out


def certify_snapshot(snap, radius_backend: str = "jacobi") -> IterationCertificate:
    """Augmented and reduced certificates, Gershgorin enclosures and, for LP
    with N ≠ ∅, the spectral radius of K⁻¹R.  Only meaningful in regularized modes."""
    from .ipm import explicit_regularizers
    from .regularizer import build_qp_reduced_system

    P, plan, theta = snap.problem, snap.plan, snap.theta
    if not plan.regularized:
        raise ValueError("certificates need a regularized mode")
    A = P.A.toarray()
    m, n = A.shape
    N, B = plan.partition.N, plan.partition.B
    Rp, Rd = explicit_regularizers(P, theta, plan)
    certs: list[SpectralCertificate] = []
    gers: list[GershgorinReport] = []
    radius = None
    memo = _EigMemo()
    if P.is_lp:
        certs.append(certify_lp_augmented(A, theta, Rd, plan.delta_d, memo=memo))
        AN = A[:, N]
        KN = (AN * theta[N]) @ AN.T
        dstar = np.diag(KN) + plan.delta_d
        certs.append(certify_lp_reduced(A[:, B], theta[B], dstar, plan.delta_d, memo=memo))
        gers.append(gershgorin_certify(Rd, plan.delta_d, KN, "R_d"))
        if len(N):
            K = (A * theta) @ A.T + plan.delta_d * np.eye(m)
            radius = spectral_radius_certify(K, KN - np.diag(np.diag(KN)), backend=radius_backend)
        # block elimination of the reduced matrix: the −Θ_B⁻¹ pivots, then the
        # normal matrix the solver factored
        D = snap.factor.D
        ldlt = (len(B) + int(np.sum(D < 0)), int(np.sum(D > 0)), int(np.sum(D == 0)))
        expected = (len(B), m, 0)
    else:
        Qd = P.Q.toarray()
        certs.append(certify_qp_augmented(A, Qd, theta, Rp, Rd, plan.delta_d, memo=memo))
        sysm = build_qp_reduced_system(P.A, P.Q, theta, plan)
        Hbar = Qd[np.ix_(B, B)] + np.diag(sysm.hdiag)
        certs.append(certify_qp_reduced(Hbar, sysm.W.toarray(), sysm.dstar, plan.delta_d,
                                        memo=memo))
        if plan.nondiag_active:
            qinv = 1.0 / plan.qbar
            AN = A[:, N]
            gers.append(gershgorin_certify(Rd, plan.delta_d, (AN * qinv) @ AN.T, "R_d"))
            QBN = Qd[np.ix_(B, N)]
            if plan.delta_pB > 0:
                gers.append(gershgorin_certify(Rp[np.ix_(B, B)], plan.delta_pB,
                                               (QBN * qinv) @ QBN.T, "R_pB"))
            QN = Qd[np.ix_(N, N)]
            if plan.delta_pN > 0:
                gers.append(gershgorin_certify(Rp[np.ix_(N, N)], plan.delta_pN, QN, "R_pN"))
        else:
            gers.append(gershgorin_certify(Rd, plan.delta_d, np.zeros((m, m)), "R_d"))
            gers.append(gershgorin_certify(Rp, plan.delta_pB, np.zeros((n, n)), "R_p"))
        ldlt = snap.factor.inertia()
        expected = (len(B), m, 0)
    return IterationCertificate(P.name, snap.state.k, plan.mode.value, len(N), certs, gers,
                                radius, ldlt, expected)


def dump_json_lines(items, path) -> int:
    """Write certificate records, one JSON object per line; returns the line count."""
    count = 0
    with open(path, "w") as fh:
        for it in items:
            for line in it.json_lines():
                fh.write(line + "\n")
                count += 1
    return count
