"""Batch runs over problem files, CSV records and performance profiles."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ipm import OPTIMAL, SolverOptions, solve
from .mps import read_mps
from .regularizer import Mode
from .spectral import IterationCertificate, certify_snapshot
from .standard import to_standard_form

CSV_VERSION = "ndreg-bench/1"
PROFILE_VERSION = "ndreg-profile/1"
CERTIFY_MAX_DIM = 300
PROBLEM_SUFFIXES = (".mps", ".qps", ".MPS", ".QPS")


@dataclass(frozen=True)
class IterRow:
    k: int
    n_N: int
    reg_thr: float
    fact_seconds: float
    nnz_factor: int


@dataclass
class BenchRecord:
    problem: str
    mode: str
    status: str
    iterations: int
    seconds: float
    objective: float = math.nan
    error: str = ""
    trace: list[IterRow] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == OPTIMAL


SUMMARY_FIELDS = ["problem", "mode", "status", "iterations", "seconds", "objective", "error"]
TRACE_FIELDS = ["problem", "mode"] + [f.name for f in fields(IterRow)]


def _secs(ns: int) -> float:
    return round(ns * 1e-9, 6)


def run_single(path, mode: Mode | str = Mode.NONDIAG, tol: float | None = None,
               maxit: int = 200, certify: bool = False
               ) -> tuple[BenchRecord, list[IterationCertificate]]:
    """Solve one file. Parse errors propagate; the caller decides the exit code."""
    path = Path(path)
    mode = Mode(mode)
    problem = to_standard_form(read_mps(path))
    certs: list[IterationCertificate] = []
    callback = None
    if certify and problem.n + problem.m <= CERTIFY_MAX_DIM:
        callback = lambda snap: certs.append(certify_snapshot(snap))  # noqa: E731
    t0 = time.perf_counter_ns()
    report = solve(problem, SolverOptions(mode=mode, tol=tol, maxit=maxit), callback)
    elapsed = time.perf_counter_ns() - t0
    trace = [IterRow(r.k, r.n_N, r.reg_thr, round(r.fact_seconds, 6), r.nnz_factor)
             for r in report.records]
    rec = BenchRecord(problem=path.stem.upper(), mode=mode.value, status=report.status,
                      iterations=report.iterations, seconds=_secs(elapsed),
                      objective=float(report.objective), trace=trace)
    return rec, certs


def _one_line(msg: str) -> str:
    # error text is stored one line per record; csv cannot carry NUL
    return msg.replace("\x00", "").replace("\r", " ").replace("\n", " ")


def problem_files(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise NotADirectoryError(str(d))
    return sorted((p for p in d.iterdir() if p.suffix in PROBLEM_SUFFIXES),
                  key=lambda p: p.name.lower())


def run_batch(directory, modes: Sequence[Mode | str] = tuple(Mode), tol: float | None = None,
              maxit: int = 200) -> list[BenchRecord]:
    """Every file in ``directory`` under every mode, in (file, mode) order.

    A problem that cannot be read or solved gets a row with status "error"
    and the batch moves on.
    """
    out = []
    for path in problem_files(directory):
        for mode in modes:
            try:
                rec, _ = run_single(path, mode, tol, maxit)
            except Exception as exc:  # recorded, not raised
                rec = BenchRecord(path.stem.upper(), Mode(mode).value, "error", 0, math.nan,
                                  error=_one_line(f"{type(exc).__name__}: {exc}"))
            out.append(rec)
    return out


# -- CSV ------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps_records(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in records:
        row = asdict(r)
        w.writerow([_fmt(row[k]) for k in SUMMARY_FIELDS])
    return buf.getvalue()


def dumps_trace(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} trace\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_FIELDS)
    for r in records:
        for t in r.trace:
            w.writerow([r.problem, r.mode] + [_fmt(v) for v in asdict(t).values()])
    return buf.getvalue()


def _rows(text: str, expect_version: str) -> list[dict]:
    # a stream, not splitlines(): quoted fields may hold \f, \x1c and friends
    buf = io.StringIO(text, newline="")
    head = buf.readline()
    if not head.startswith("#") or not head[1:].split():
        raise ValueError("missing version header")
    if head[1:].split()[0] != expect_version:
        raise ValueError(f"unsupported CSV version: {head.strip()}")
    return list(csv.DictReader(buf))


def loads_records(text: str, trace_text: str | None = None) -> list[BenchRecord]:
    recs = []
    for row in _rows(text, CSV_VERSION):
        recs.append(BenchRecord(row["problem"], row["mode"], row["status"],
                                int(row["iterations"]), float(row["seconds"]),
                                float(row["objective"]), row["error"]))
    if trace_text is not None:
        by_key = {(r.problem, r.mode): r for r in recs}
        for row in _rows(trace_text, CSV_VERSION):
            by_key[(row["problem"], row["mode"])].trace.append(
                IterRow(int(row["k"]), int(row["n_N"]), float(row["reg_thr"]),
                        float(row["fact_seconds"]), int(row["nnz_factor"])))
    return recs


def trace_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".trace" + p.suffix)


def _write(path, text: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def _read(path) -> str:
    with open(path, newline="", encoding="utf-8") as fh:
        return fh.read()


def write_records(records: Sequence[BenchRecord], path, trace: bool = True) -> None:
    _write(path, dumps_records(records))
    if trace:
        _write(trace_path(path), dumps_trace(records))


def read_records(path) -> list[BenchRecord]:
    tp = trace_path(path)
    return loads_records(_read(path), _read(tp) if tp.exists() else None)


# -- performance profiles ------------------------------------------------------------

@dataclass(frozen=True)
class PerformanceProfile:
    labels: tuple[str, ...]
    taus: np.ndarray               # ascending, starts at 1
    curves: np.ndarray             # (len(labels), len(taus))
    ratios: np.ndarray             # (problems, solvers), inf for failures

    def at(self, label: str, tau: float) -> float:
        r = self.ratios[:, self.labels.index(label)]
        return float(np.count_nonzero(r <= tau)) / len(r) if len(r) else 0.0

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {PROFILE_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", *self.labels])
        for j, t in enumerate(self.taus):
            w.writerow([repr(float(t)), *(repr(float(c)) for c in self.curves[:, j])])
        return buf.getvalue()


def profile_from_matrix(metric: np.ndarray, labels: Sequence[str], grid_points: int = 50
                        ) -> PerformanceProfile:
    """``metric[p, s]`` is solver s's cost on problem p; inf or nan means it failed.

    Curves are evaluated on a log grid from 1 to the largest finite ratio,
    merged with every finite ratio so that each step of the curve is hit.
    """
    T = np.array(metric, dtype=float)
    if T.ndim != 2 or T.shape[1] != len(labels):
        raise ValueError("metric must be problems x solvers")
    if len(labels) < 2:
        raise ValueError("a profile compares at least two solvers")
    T[~np.isfinite(T)] = np.inf
    if np.any(T <= 0):
        raise ValueError("metric values must be positive")
    best = T.min(axis=1, keepdims=True) if len(T) else np.zeros((0, 1))
    with np.errstate(invalid="ignore"):
        R = np.where(np.isfinite(best), T / best, np.inf)
    finite = R[np.isfinite(R)]
    top = float(finite.max()) if finite.size else 1.0
    grid = np.logspace(0.0, math.log10(top), grid_points) if top > 1 else np.ones(1)
    taus = np.unique(np.concatenate([[1.0], grid, finite]))
    P = max(len(T), 1)
    curves = np.array([[np.count_nonzero(R[:, s] <= t) / P for t in taus]
                       for s in range(len(labels))]).reshape(len(labels), len(taus))
    return PerformanceProfile(tuple(labels), taus, curves, R)


def performance_profile(records: Sequence[BenchRecord], metric: str = "time"
                        ) -> PerformanceProfile:
    """Profile the modes in ``records`` against each other. Unsolved runs count as inf."""
    key = {"time": "seconds", "iter": "iterations", "iterations": "iterations"}.get(metric)
    if key is None:
        raise ValueError(f"unknown metric {metric!r}")
    labels = sorted({r.mode for r in records}, key=lambda s: [m.value for m in Mode].index(s)
                    if s in {m.value for m in Mode} else len(Mode))
    problems = sorted({r.problem for r in records})
    T = np.full((len(problems), len(labels)), np.inf)
    for r in records:
        v = float(getattr(r, key))
        if r.solved and math.isnan(v):
            raise ValueError(f"{r.problem}/{r.mode}: metric {key} missing")
        if r.solved:
            # floor at one unit: zero iterations or a sub-microsecond solve
            v = max(v, 1.0 if key == "iterations" else 1e-6)
            T[problems.index(r.problem), labels.index(r.mode)] = v
    return profile_from_matrix(T, labels)


# -- sparsity comparison -------------------------------------------------------------

@dataclass(frozen=True)
class SparsityRow:
    problem: str
    k: int                  # iteration of largest |N| in the non-diagonal run
    n_N: int
    nnz_nondiag: int
    fact_nondiag: float
    nnz_uniform: int
    fact_uniform: float


def sparsity_row(nondiag: BenchRecord, uniform: BenchRecord) -> SparsityRow | None:
    """Factorization cost of both modes at the iteration where |N| peaks.

    None when N stays empty or the uniform run ended before that iteration.
    """
    if not nondiag.trace:
        return None
    peak = max(nondiag.trace, key=lambda t: (t.n_N, -t.k))
    if peak.n_N == 0:
        return None
    other = {t.k: t for t in uniform.trace}.get(peak.k)
    if other is None:
        return None
    return SparsityRow(nondiag.problem, peak.k, peak.n_N, peak.nnz_factor, peak.fact_seconds,
                       other.nnz_factor, other.fact_seconds)
