"""Reader and writer for MPS and QPS files.

Both the whitespace-separated ("free") layout and the classic column
("fixed") layout are accepted.  QPS adds a QUADOBJ section holding the lower
triangle of Q, or a QMATRIX section holding all of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

SECTIONS = ("NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS",
            "QUADOBJ", "QMATRIX", "QSECTION", "ENDATA")
ROW_TYPES = ("N", "E", "L", "G")
BOUND_TYPES = ("UP", "LO", "FX", "FR", "MI", "PL", "BV", "LI", "UI")


class MPSParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass
class RawProblem:
    """Problem exactly as written in the file, minimized as cᵀx + ½xᵀQx + constant."""

    name: str = ""
    objective: str | None = None
    row_names: list[str] = field(default_factory=list)
    row_types: list[str] = field(default_factory=list)
    col_names: list[str] = field(default_factory=list)
    # (row index, col index, value); duplicates are summed downstream
    entries: list[tuple[int, int, float]] = field(default_factory=list)
    cost: dict[int, float] = field(default_factory=dict)
    rhs: dict[int, float] = field(default_factory=dict)
    ranges: dict[int, float] = field(default_factory=dict)
    lower: dict[int, float] = field(default_factory=dict)
    upper: dict[int, float] = field(default_factory=dict)
    # lower triangle (i >= j) of Q
    quad: list[tuple[int, int, float]] = field(default_factory=list)
    constant: float = 0.0
    maximize: bool = False

    @property
    def nrows(self) -> int:
        return len(self.row_names)

    @property
    def ncols(self) -> int:
        return len(self.col_names)

    def bounds(self, j: int) -> tuple[float, float]:
        return self.lower.get(j, 0.0), self.upper.get(j, math.inf)


def _fixed_fields(line: str) -> list[str]:
    # columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
    spans = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)]
    out = [line[a:b].strip() for a, b in spans]
    while out and out[-1] == "":
        out.pop()
    return out


def _number(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise MPSParseError(lineno, f"malformed number {tok!r}") from None
    if math.isnan(v):
        raise MPSParseError(lineno, "NaN is not a valid coefficient")
    return v


def parse_mps(text: str, fixed: bool = False) -> RawProblem:
    """Parse MPS/QPS text.  ``fixed=True`` uses column positions instead of whitespace."""
    p = RawProblem()
    row_index: dict[str, int] = {}
    col_index: dict[str, int] = {}
    section = None
    seen = set()
    quad: dict[tuple[int, int], float] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            key = head[0].upper()
            if key not in SECTIONS:
                raise MPSParseError(lineno, f"unknown section {head[0]!r}")
            if key in seen and key != "ENDATA":
                raise MPSParseError(lineno, f"section {key} repeated")
            seen.add(key)
            section = key
            if key == "NAME":
                p.name = raw[4:].strip() if fixed else " ".join(head[1:])
            elif key == "OBJSENSE" and len(head) > 1:
                p.maximize = head[1].upper() in ("MAX", "MAXIMIZE")
            elif key == "ENDATA":
                break
            continue

        if fixed:
            toks = _fixed_fields(raw)
            # field 1 only carries a code in ROWS and BOUNDS
            if section not in ("ROWS", "BOUNDS") and toks:
                toks = toks[1:]
        else:
            toks = raw.split()
        if section is None:
            raise MPSParseError(lineno, "data line before any section")

        if section == "OBJSENSE":
            p.maximize = toks[0].upper() in ("MAX", "MAXIMIZE")

        elif section == "ROWS":
            if len(toks) != 2:
                raise MPSParseError(lineno, "ROWS line needs a type and a name")
            kind, name = toks[0].upper(), toks[1]
            if kind not in ROW_TYPES:
                raise MPSParseError(lineno, f"unknown row type {kind!r}")
            if kind == "N":
                if name in row_index:
                    raise MPSParseError(lineno, f"objective row {name!r} declared twice")
                if p.objective is not None:
                    # extra free rows carry no constraint; drop them
                    row_index[name] = -1
                    continue
                p.objective = name
                row_index[name] = -1
                continue
            if name in row_index:
                raise MPSParseError(lineno, f"row {name!r} declared twice")
            row_index[name] = len(p.row_names)
            p.row_names.append(name)
            p.row_types.append(kind)

        elif section == "COLUMNS":
            if len(toks) > 1 and toks[1].strip("'").upper() == "MARKER":
                continue
            if len(toks) not in (3, 5):
                raise MPSParseError(lineno, "COLUMNS line needs 3 or 5 fields")
            col = toks[0]
            if col not in col_index:
                col_index[col] = len(p.col_names)
                p.col_names.append(col)
            j = col_index[col]
            for rname, val in zip(toks[1::2], toks[2::2]):
                v = _number(val, lineno)
                if rname not in row_index:
                    raise MPSParseError(lineno, f"unknown row {rname!r}")
                i = row_index[rname]
                if rname == p.objective:
                    p.cost[j] = p.cost.get(j, 0.0) + v
                elif i >= 0 and v != 0.0:
                    p.entries.append((i, j, v))

        elif section in ("RHS", "RANGES"):
            pairs = toks[1:] if len(toks) % 2 == 1 else toks
            if len(pairs) not in (2, 4):
                raise MPSParseError(lineno, f"{section} line has {len(toks)} fields")
            for rname, val in zip(pairs[0::2], pairs[1::2]):
                v = _number(val, lineno)
                if rname not in row_index:
                    raise MPSParseError(lineno, f"unknown row {rname!r}")
                i = row_index[rname]
                if section == "RHS":
                    if rname == p.objective:
                        p.constant = -v
                    elif i >= 0:
                        p.rhs[i] = v
                elif i >= 0:
                    p.ranges[i] = v

        elif section == "BOUNDS":
            kind = toks[0].upper()
            if kind not in BOUND_TYPES:
                raise MPSParseError(lineno, f"unsupported bound type {toks[0]!r}")
            needs_value = kind not in ("FR", "MI", "PL", "BV")
            if needs_value:
                if len(toks) == 4:
                    col, val = toks[2], toks[3]
                elif len(toks) == 3:
                    col, val = toks[1], toks[2]
                else:
                    raise MPSParseError(lineno, "BOUNDS line needs a value")
                v = _number(val, lineno)
            else:
                col = toks[-1] if len(toks) in (2, 3) else None
                if col is None:
                    raise MPSParseError(lineno, "malformed BOUNDS line")
                v = 0.0
            if col not in col_index:
                raise MPSParseError(lineno, f"unknown column {col!r}")
            j = col_index[col]
            if kind in ("UP", "UI"):
                p.upper[j] = v
                if v < 0 and p.lower.get(j, 0.0) == 0.0:
                    p.lower[j] = -math.inf
            elif kind in ("LO", "LI"):
                p.lower[j] = v
            elif kind == "FX":
                p.lower[j] = v
                p.upper[j] = v
            elif kind == "FR":
                p.lower[j] = -math.inf
                p.upper[j] = math.inf
            elif kind == "MI":
                p.lower[j] = -math.inf
            elif kind == "PL":
                p.upper[j] = math.inf
            elif kind == "BV":
                p.lower[j] = 0.0
                p.upper[j] = 1.0

        elif section in ("QUADOBJ", "QMATRIX", "QSECTION"):
            if len(toks) != 3:
                raise MPSParseError(lineno, f"{section} line needs 3 fields")
            a, b = toks[0], toks[1]
            if a not in col_index or b not in col_index:
                raise MPSParseError(lineno, "unknown column in quadratic section")
            v = _number(toks[2], lineno)
            i, j = col_index[a], col_index[b]
            if section == "QUADOBJ":
                key = (max(i, j), min(i, j))
                quad[key] = quad.get(key, 0.0) + v
            elif i >= j:
                # full matrix listed; keep the lower half only
                quad[(i, j)] = quad.get((i, j), 0.0) + v

        elif section == "NAME":
            raise MPSParseError(lineno, "unexpected data in NAME section")

    if "ROWS" not in seen:
        raise MPSParseError(0, "missing ROWS section")
    if "COLUMNS" not in seen:
        raise MPSParseError(0, "missing COLUMNS section")
    p.quad = [(i, j, v) for (i, j), v in sorted(quad.items()) if v != 0.0]
    return p


def read_mps(path, fixed: bool = False) -> RawProblem:
    with open(path) as fh:
        return parse_mps(fh.read(), fixed=fixed)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_mps(p: RawProblem) -> str:
    """Free-format MPS/QPS text for ``p``; parse_mps(write_mps(p)) reproduces it."""
    obj = p.objective or "OBJ"
    out = [f"NAME {p.name}".rstrip(), "ROWS", f" N {obj}"]
    out += [f" {t} {r}" for r, t in zip(p.row_names, p.row_types)]
    out.append("COLUMNS")
    by_col: dict[int, list[tuple[int, float]]] = {}
    for i, j, v in p.entries:
        by_col.setdefault(j, []).append((i, v))
    for j, name in enumerate(p.col_names):
        if j in p.cost:
            out.append(f" {name} {obj} {_fmt(p.cost[j])}")
        for i, v in by_col.get(j, []):
            out.append(f" {name} {p.row_names[i]} {_fmt(v)}")
        if j not in p.cost and j not in by_col:
            out.append(f" {name} {obj} 0.0")
    out.append("RHS")
    if p.constant:
        out.append(f" RHS {obj} {_fmt(-p.constant)}")
    for i in sorted(p.rhs):
        out.append(f" RHS {p.row_names[i]} {_fmt(p.rhs[i])}")
    if p.ranges:
        out.append("RANGES")
        for i in sorted(p.ranges):
            out.append(f" RNG {p.row_names[i]} {_fmt(p.ranges[i])}")
    bl = []
    for j, name in enumerate(p.col_names):
        lo, up = p.bounds(j)
        if lo == up:
            bl.append(f" FX BND {name} {_fmt(lo)}")
            continue
        if lo == -math.inf and up == math.inf:
            bl.append(f" FR BND {name}")
            continue
        if lo == -math.inf:
            bl.append(f" MI BND {name}")
        elif lo != 0.0:
            bl.append(f" LO BND {name} {_fmt(lo)}")
        if up != math.inf:
            bl.append(f" UP BND {name} {_fmt(up)}")
    if bl:
        out.append("BOUNDS")
        out += bl
    if p.quad:
        out.append("QUADOBJ")
        for i, j, v in p.quad:
            out.append(f" {p.col_names[i]} {p.col_names[j]} {_fmt(v)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
