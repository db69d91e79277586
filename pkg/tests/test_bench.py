import math
import shutil

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ndreg import bench
from ndreg.bench import BenchRecord, IterRow, performance_profile, profile_from_matrix


# -- CSV --------------------------------------------------------------------------

_floats = st.floats(allow_nan=False, allow_infinity=False, width=64)
_text = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00\r"),
                max_size=20)

_rows = st.builds(IterRow, st.integers(0, 500), st.integers(0, 10**5), _floats, _floats,
                  st.integers(0, 10**9))


@st.composite
def _records(draw):
    names = draw(st.lists(st.from_regex(r"[A-Z][A-Z0-9]{0,8}", fullmatch=True),
                          unique=True, max_size=5))
    out = []
    for p in names:
        for mode in draw(st.lists(st.sampled_from(["nondiag", "uniform", "none"]),
                                  unique=True, min_size=1)):
            out.append(BenchRecord(p, mode,
                                   draw(st.sampled_from(["optimal", "iteration-limit", "error"])),
                                   draw(st.integers(0, 200)), draw(_floats),
                                   draw(st.one_of(_floats, st.just(math.inf))), draw(_text),
                                   draw(st.lists(_rows, max_size=4))))
    return out


@given(_records())
def test_csv_round_trip(recs):
    back = bench.loads_records(bench.dumps_records(recs), bench.dumps_trace(recs))
    assert back == recs


def test_csv_nan_objective_round_trip():
    r = BenchRecord("X", "none", "error", 0, math.nan, error="boom")
    (b,) = bench.loads_records(bench.dumps_records([r]))
    assert math.isnan(b.seconds) and math.isnan(b.objective) and b.error == "boom"


def test_csv_version_checked():
    with pytest.raises(ValueError):
        bench.loads_records("problem,mode\n")
    with pytest.raises(ValueError):
        bench.loads_records("# other/9\nproblem,mode\n")


def test_write_read_files(tmp_path):
    recs = [BenchRecord("A", "nondiag", "optimal", 3, 0.5, 1.25, "",
                        [IterRow(0, 1, 1.0, 0.001, 7)])]
    bench.write_records(recs, tmp_path / "r.csv")
    assert (tmp_path / "r.trace.csv").exists()
    assert bench.read_records(tmp_path / "r.csv") == recs


# -- batch runs --------------------------------------------------------------------

def test_empty_dir_gives_header_only(tmp_path):
    recs = bench.run_batch(tmp_path, ["nondiag", "uniform"])
    assert recs == []
    text = bench.dumps_records(recs)
    assert text.splitlines() == [f"# {bench.CSV_VERSION}", ",".join(bench.SUMMARY_FIELDS)]


def test_missing_dir(tmp_path):
    with pytest.raises(NotADirectoryError):
        bench.run_batch(tmp_path / "nope")


def test_three_fixtures_two_modes(tmp_path, data_dir):
    for name in ("tiny.mps", "square.mps", "infeas.mps"):
        shutil.copy(data_dir / "toy" / name, tmp_path / name)
    recs = bench.run_batch(tmp_path, ["nondiag", "uniform"], maxit=60)
    assert [(r.problem, r.mode) for r in recs] == [
        (p, m) for p in ("INFEAS", "SQUARE", "TINY") for m in ("nondiag", "uniform")]
    status = {(r.problem, r.mode): r.status for r in recs}
    assert status[("INFEAS", "nondiag")] == status[("INFEAS", "uniform")] == "iteration-limit"
    assert all(s == "optimal" for (p, _), s in status.items() if p != "INFEAS")
    for r in recs:
        assert len(r.trace) == r.iterations
        assert r.seconds >= sum(t.fact_seconds for t in r.trace) - 1e-5


def test_batch_records_bad_file(tmp_path, data_dir):
    shutil.copy(data_dir / "toy" / "tiny.mps", tmp_path / "tiny.mps")
    (tmp_path / "broken.mps").write_text("NAME X\nROWS\n Q R1\nENDATA\n")
    recs = bench.run_batch(tmp_path, ["nondiag"])
    assert [r.status for r in recs] == ["error", "optimal"]
    assert "line" in recs[0].error


def test_afiro_none_mode(data_dir):
    rec, _ = bench.run_single(data_dir / "netlib" / "afiro.mps", "none")
    assert rec.solved and rec.problem == "AFIRO"


def test_run_single_certify(data_dir):
    rec, certs = bench.run_single(data_dir / "toy" / "tiny.mps", "nondiag", certify=True)
    assert len(certs) == rec.iterations and all(c.passed for c in certs)


# -- profiles ----------------------------------------------------------------------

def test_profile_hand_tau_two():
    prof = profile_from_matrix(np.array([[1.0, 2.0], [2.0, 2.0]]), ["s1", "s2"])
    assert prof.at("s1", 2.0) == 1.0 and prof.at("s2", 2.0) == 1.0
    # the ratio definition at tau = 1: s1 is best on both, s2 ties on the second
    assert prof.at("s1", 1.0) == 1.0 and prof.at("s2", 1.0) == 0.5


def test_profile_self_comparison():
    t = np.array([[0.3], [1.7], [4.0]])
    prof = profile_from_matrix(np.hstack([t, t]), ["a", "b"])
    assert np.all(prof.curves[:, 0] == 1.0)


def test_profile_all_fail():
    T = np.array([[1.0, np.inf], [2.0, np.inf], [5.0, np.nan]])
    prof = profile_from_matrix(T, ["ok", "bad"])
    assert np.all(prof.curves[1] == 0.0)
    assert prof.at("bad", 1e300) == 0.0


def test_profile_needs_two_solvers():
    with pytest.raises(ValueError):
        profile_from_matrix(np.ones((2, 1)), ["only"])
    with pytest.raises(ValueError):
        profile_from_matrix(np.array([[0.0, 1.0]]), ["a", "b"])


@given(st.integers(0, 10**6), st.integers(1, 12), st.integers(2, 4))
def test_profile_properties(seed, P, S):
    r = np.random.default_rng(seed)
    T = 10.0 ** r.uniform(-3, 2, (P, S))
    T[r.random((P, S)) < 0.25] = np.inf
    prof = profile_from_matrix(T, [f"s{i}" for i in range(S)])
    c = prof.curves
    assert prof.taus[0] == 1.0 and np.all(np.diff(prof.taus) > 0)
    assert np.all((0 <= c) & (c <= 1)) and np.all(np.diff(c, axis=1) >= 0)
    solved = np.isfinite(T).sum(axis=0) / P
    assert np.allclose(c[:, -1], solved)
    best = np.isfinite(T).any(axis=1)
    assert np.isclose(c[:, 0].sum(), 0) or c[:, 0].sum() >= best.mean() - 1e-12


def test_profile_from_records():
    recs = [BenchRecord("P1", "nondiag", "optimal", 10, 1.0),
            BenchRecord("P1", "uniform", "optimal", 20, 2.0),
            BenchRecord("P2", "nondiag", "iteration-limit", 200, 9.0),
            BenchRecord("P2", "uniform", "optimal", 15, 3.0)]
    prof = performance_profile(recs, "iter")
    assert prof.labels == ("nondiag", "uniform")
    assert prof.at("nondiag", 1.0) == 0.5 and prof.at("nondiag", 100.0) == 0.5
    assert prof.at("uniform", 1.0) == 0.5 and prof.at("uniform", 2.0) == 1.0
    with pytest.raises(ValueError):
        performance_profile(recs, "memory")


def test_profile_csv(tmp_path):
    prof = profile_from_matrix(np.array([[1.0, 2.0], [3.0, 1.0]]), ["a", "b"])
    lines = prof.dumps().splitlines()
    assert lines[0] == f"# {bench.PROFILE_VERSION}" and lines[1] == "tau,a,b"
    assert len(lines) == 2 + len(prof.taus)


# -- sparsity row ------------------------------------------------------------------

def test_sparsity_row_picks_peak():
    nd = BenchRecord("P", "nondiag", "optimal", 3, 1.0, trace=[
        IterRow(0, 0, 1.0, 0.1, 10), IterRow(1, 5, 0.5, 0.1, 8), IterRow(2, 5, 0.1, 0.1, 9)])
    un = BenchRecord("P", "uniform", "optimal", 3, 1.0, trace=[
        IterRow(0, 0, 1.0, 0.1, 10), IterRow(1, 0, 0.5, 0.2, 30), IterRow(2, 0, 0.1, 0.2, 30)])
    row = bench.sparsity_row(nd, un)
    assert (row.k, row.n_N, row.nnz_nondiag, row.nnz_uniform) == (1, 5, 8, 30)
    assert bench.sparsity_row(un, nd) is None
