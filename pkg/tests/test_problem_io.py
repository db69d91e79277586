import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from ndreg.mps import MPSParseError, parse_mps, read_mps, write_mps
from ndreg.standard import (BoxPolicy, InfeasibleBounds, expand_free_boxes, to_standard_form,
                            transfer_point)

MINIMAL = """NAME MIN
ROWS
 N OBJ
 E R1
COLUMNS
 X OBJ 1 R1 2
 Y OBJ 1 R1 3
RHS
 RHS R1 5
ENDATA
"""


def test_minimal_mps():
    raw = parse_mps(MINIMAL)
    P = to_standard_form(raw)
    assert P.A.shape == (1, 2)
    assert np.array_equal(P.A.toarray(), [[2, 3]])
    assert np.array_equal(P.b, [5])


def test_quadobj_symmetric():
    text = MINIMAL.replace("ENDATA", "QUADOBJ\n X X 2\n Y X 1\n Y Y 4\nENDATA")
    P = to_standard_form(parse_mps(text))
    Q = P.Q.full().toarray()
    assert np.array_equal(Q, [[2, 1], [1, 4]])


def test_missing_rows_is_error():
    bad = "NAME X\nCOLUMNS\n X OBJ 1\nENDATA\n"
    with pytest.raises(MPSParseError):
        parse_mps(bad)


@pytest.mark.parametrize("text", [
    MINIMAL.replace("ROWS", "ROWZ"),                          # unknown section
    MINIMAL.replace(" E R1", " N OBJ\n E R1"),                # objective row declared twice
    MINIMAL.replace("RHS R1 5", "RHS R1 5x"),                 # malformed number
])
def test_parse_errors_carry_line_numbers(text):
    with pytest.raises(MPSParseError) as e:
        parse_mps(text)
    assert e.value.lineno > 0


def test_golden_tiny(data_dir):
    raw = read_mps(data_dir / "toy" / "tiny.mps")
    assert raw.name == "TINY"
    assert raw.row_types == ["E"]
    assert raw.col_names == ["X01", "X02"]
    assert sorted(raw.entries) == [(0, 0, 1.0), (0, 1, 1.0)]
    assert raw.cost == {0: 1.0, 1: 2.0}
    assert raw.rhs == {0: 2.0}


def test_golden_hs21(data_dir):
    raw = read_mps(data_dir / "maros" / "hs21.qps")
    assert sorted(raw.quad) == [(0, 0, 0.02), (1, 1, 2.0)]
    assert raw.constant == -100.0
    assert raw.bounds(0) == (2.0, 50.0) and raw.bounds(1) == (-50.0, 50.0)
    assert sorted(raw.entries) == [(0, 0, 10.0), (0, 1, -1.0)]


def _fixed_line(f1="", f2="", f3="", f4="", f5="", f6=""):
    line = " " + f1.ljust(2) + " " + f2.ljust(8) + "  " + f3.ljust(8) + "  " + f4.rjust(12)
    if f5:
        line += "   " + f5.ljust(8) + "  " + f6.rjust(12)
    return line


def test_fixed_format():
    # names with embedded blanks only survive the column layout
    fixed = "\n".join([
        "NAME          FIX", "ROWS", " N  COST", " L  LIM 1", "COLUMNS",
        _fixed_line("", "X ONE", "COST", "1.0", "LIM 1", "1.0"),
        "RHS", _fixed_line("", "RHS", "LIM 1", "4.0"), "ENDATA"])
    raw = parse_mps(fixed, fixed=True)
    assert raw.col_names == ["X ONE"]
    assert raw.row_names == ["LIM 1"]
    assert raw.entries == [(0, 0, 1.0)]
    assert raw.rhs == {0: 4.0}


@pytest.mark.parametrize("path", ["toy/tiny.mps", "toy/rankdef.mps", "maros/hs118.qps",
                                  "netlib/afiro.mps"])
def test_write_parse_roundtrip(data_dir, path):
    raw = read_mps(data_dir / path)
    again = parse_mps(write_mps(raw))
    for f in ("row_names", "row_types", "col_names", "cost", "rhs", "ranges", "lower",
              "upper", "constant"):
        assert getattr(again, f) == getattr(raw, f), f
    assert sorted(again.entries) == sorted(raw.entries)
    assert sorted(again.quad) == sorted(raw.quad)


def test_l_row_gets_slack():
    text = MINIMAL.replace(" E R1", " L R1")
    P = to_standard_form(parse_mps(text))
    assert P.A.shape == (1, 3)
    assert np.array_equal(P.A.toarray(), [[2, 3, 1]])


def test_infeasible_bounds():
    text = MINIMAL.replace("ENDATA", "BOUNDS\n LO B X 3\n UP B X 1\nENDATA")
    with pytest.raises(InfeasibleBounds):
        to_standard_form(parse_mps(text))


def test_free_variable_boxed():
    text = MINIMAL.replace("ENDATA", "BOUNDS\n FR B X\nENDATA")
    P = to_standard_form(parse_mps(text))
    assert len(P.free_boxes) == 1
    fb = P.free_boxes[0]
    assert (fb.lower, fb.upper) == (-100.0, 100.0)
    # x' + w = 200 row present
    assert P.b[fb.row] == 200.0


def test_bounded_objective_constant():
    # min x + 2y, 1 <= x <= 3, y <= 4 (y >= 0), x + y >= 2
    text = """NAME B
ROWS
 N OBJ
 G R
COLUMNS
 X OBJ 1 R 1
 Y OBJ 2 R 1
RHS
 RHS R 2
BOUNDS
 LO B X 1
 UP B X 3
 UP B Y 4
ENDATA
"""
    P = to_standard_form(parse_mps(text))
    assert P.constant == 1.0
    # standard point for x=2.5, y=1: x'=1.5, y=1, surplus 1.5, box slacks 0.5 and 3
    xs = np.zeros(P.n)
    xo = np.array([2.5, 1.0])
    xs[P.orig_col] = (xo - P.orig_shift) * P.orig_sign
    xs[2] = 1.5
    for fb_col, slack_col, width in [(0, 3, 2.0), (1, 4, 4.0)]:
        xs[slack_col] = width - xs[fb_col]
    assert np.allclose(P.A.full() @ xs, P.b)
    assert P.objective(xs) == pytest.approx(2.5 + 2.0)
    assert np.allclose(P.recover(xs), xo)


def _box_problem(values):
    cols = "\n".join(f" X{k} OBJ 1 R 1" for k in range(len(values)))
    bnds = "\n".join(f" FR B X{k}" for k in range(len(values)))
    text = f"NAME F\nROWS\n N OBJ\n E R\nCOLUMNS\n{cols}\nRHS\n RHS R 0\nBOUNDS\n{bnds}\nENDATA\n"
    P = to_standard_form(parse_mps(text))
    xs = np.zeros(P.n)
    for fb, v in zip(P.free_boxes, values):
        xs[fb.col] = v - fb.lower
        xs[fb.slack_col] = fb.upper - v
    return P, xs


def test_expand_far_inside_unchanged():
    P, xs = _box_problem([0.0, 50.0])
    Q, changed = expand_free_boxes(P, xs)
    assert not changed and Q is P


def test_expand_near_bound_doubles():
    P, xs = _box_problem([99.5])
    Q, changed = expand_free_boxes(P, xs)
    assert changed
    assert (Q.free_boxes[0].lower, Q.free_boxes[0].upper) == (-100.0, 200.0)


def test_expand_two_at_boundary():
    P, xs = _box_problem([99.9, -99.9])
    Q, changed = expand_free_boxes(P, xs)
    assert changed
    assert [(f.lower, f.upper) for f in Q.free_boxes] == [(-100.0, 200.0), (-200.0, 100.0)]


def test_transfer_point_keeps_original_variables_and_residuals():
    P, xs = _box_problem([99.5, 10.0])
    Q, _ = expand_free_boxes(P, xs)
    xn = transfer_point(P, Q, xs)
    assert np.allclose(Q.recover(xn), P.recover(xs))
    assert np.allclose(Q.A.full() @ xn - Q.b, P.A.full() @ xs - P.b)


def test_box_policy_configurable():
    P, xs = _box_problem([90.0])
    Q, changed = expand_free_boxes(P, xs, BoxPolicy(trigger=0.2, factor=3.0))
    assert changed and Q.free_boxes[0].upper == 300.0


@given(st.integers(0, 10**6))
def test_standard_form_preserves_optimum(seed):
    """Random bounded LP with L/G/E rows and ranges: the standard form has the
    same optimum as scipy's linprog on the original data."""
    r = np.random.default_rng(seed)
    m, n = 3, 4
    A = np.round(r.uniform(-3, 3, (m, n)), 1)
    x0 = r.uniform(0, 2, n)
    kinds = r.choice(["L", "G", "E"], m)
    lo = np.where(r.random(n) < 0.5, -1.0, 0.0)
    up = np.where(r.random(n) < 0.5, 3.0, math.inf)
    c = np.round(r.uniform(-1, 2, n), 1)
    rhs = A @ x0
    lines = ["NAME R", "ROWS", " N OBJ"] + [f" {k} R{i}" for i, k in enumerate(kinds)]
    lines += ["COLUMNS"] + [f" X{j} OBJ {float(c[j])!r}" for j in range(n)]
    lines += [f" X{j} R{i} {float(A[i, j])!r}" for j in range(n) for i in range(m) if A[i, j] != 0]
    lines += ["RHS"] + [f" RHS R{i} {float(rhs[i])!r}" for i in range(m)]
    lines += ["RANGES", " RNG R0 0.5", "BOUNDS"]
    for j in range(n):
        if lo[j] != 0:
            lines.append(f" LO B X{j} {float(lo[j])!r}")
        if up[j] < math.inf:
            lines.append(f" UP B X{j} {float(up[j])!r}")
    lines.append("ENDATA")
    raw = parse_mps("\n".join(lines))
    P = to_standard_form(raw)

    def row_bounds(i):
        k = kinds[i]
        if i == 0:
            if k == "E":
                return rhs[0], rhs[0] + 0.5
            return (rhs[0] - 0.5, rhs[0]) if k == "L" else (rhs[0], rhs[0] + 0.5)
        return {"L": (-math.inf, rhs[i]), "G": (rhs[i], math.inf), "E": (rhs[i], rhs[i])}[k]

    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i in range(m):
        lo_i, hi_i = row_bounds(i)
        if lo_i == hi_i:
            A_eq.append(A[i]); b_eq.append(lo_i)
            continue
        if hi_i < math.inf:
            A_ub.append(A[i]); b_ub.append(hi_i)
        if lo_i > -math.inf:
            A_ub.append(-A[i]); b_ub.append(-lo_i)
    bnds = [(lo[j], None if up[j] == math.inf else up[j]) for j in range(n)]
    ref = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None,
                  b_eq=b_eq or None, bounds=bnds, method="highs")
    std = linprog(P.c, A_eq=P.A.full().toarray(), b_eq=P.b, bounds=[(0, None)] * P.n,
                  method="highs")
    assert ref.status == std.status
    if ref.status == 0:
        assert std.fun + P.constant == pytest.approx(ref.fun, abs=1e-7)
        xo = P.recover(std.x)
        assert c @ xo == pytest.approx(P.objective(std.x), abs=1e-7)
