"""ndreg command line: solve, bench, profile.

Exit codes: 0 ok, 1 the solver did not reach optimality, 2 bad input.
NDREG_TOL and NDREG_MAXIT set defaults for --tol and --maxit.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import bench
from .mps import MPSParseError
from .regularizer import Mode
from .spectral import dump_json_lines
from .standard import InfeasibleBounds

log = logging.getLogger("ndreg")

EXIT_OK, EXIT_NONOPTIMAL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _env(name: str, conv):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return conv(raw)
    except ValueError:
        raise InputError(f"{name}={raw!r} is not a valid {conv.__name__}") from None


def _limits(args) -> tuple[float | None, int]:
    tol = args.tol if args.tol is not None else _env("NDREG_TOL", float)
    maxit = args.maxit if args.maxit is not None else _env("NDREG_MAXIT", int)
    return tol, (maxit if maxit is not None else 200)


def _modes(text: str) -> list[Mode]:
    try:
        return [Mode(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_solve(args) -> int:
    tol, maxit = _limits(args)
    path = Path(args.file)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    rec, certs = bench.run_single(path, args.mode, tol, maxit, certify=args.certify)
    print(f"{rec.problem}  mode={rec.mode}  status={rec.status}  iterations={rec.iterations}  "
          f"objective={rec.objective:.10g}  seconds={rec.seconds:.6f}")
    if args.verbose:
        for t in rec.trace:
            print(f"  k={t.k:3d}  |N|={t.n_N:5d}  reg_thr={t.reg_thr:.3e}  "
                  f"fact={t.fact_seconds:.6f}s  nnz(L)={t.nnz_factor}")
    if args.certify:
        if not certs:
            print("certify: skipped (n + m above the dense limit)")
        else:
            bad = [c for c in certs if not c.passed]
            print(f"certify: {len(certs) - len(bad)}/{len(certs)} iterations passed")
            for c in bad:
                print(f"  iteration {c.k} failed")
            if args.cert_json:
                dump_json_lines(certs, args.cert_json)
    if args.csv:
        bench.write_records([rec], args.csv)
    return EXIT_OK if rec.solved else EXIT_NONOPTIMAL


def cmd_bench(args) -> int:
    tol, maxit = _limits(args)
    try:
        records = bench.run_batch(args.dir, _modes(args.modes), tol, maxit)
    except NotADirectoryError:
        raise InputError(f"not a directory: {args.dir}") from None
    for r in records:
        print(f"{r.problem:12s} {r.mode:8s} {r.status:22s} {r.iterations:4d} {r.seconds:10.6f}")
    bench.write_records(records, args.csv)
    return EXIT_OK


def cmd_profile(args) -> int:
    records = []
    for p in args.csv:
        try:
            records += bench.read_records(p)
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"{p}: {exc}") from None
    try:
        prof = bench.performance_profile(records, args.metric)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = prof.dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ndreg", description=__doc__.splitlines()[0])
    ap.add_argument("-q", "--quiet", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one MPS/QPS file")
    s.add_argument("file")
    s.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.NONDIAG.value)
    s.add_argument("--tol", type=float)
    s.add_argument("--maxit", type=int)
    s.add_argument("--certify", action="store_true",
                   help="run the spectral checks on every iteration (n + m <= 300)")
    s.add_argument("--cert-json", help="write certificate records as JSON lines")
    s.add_argument("--csv")
    s.add_argument("-v", "--verbose", action="store_true", help="print the iteration trace")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="solve every file in a directory under several modes")
    b.add_argument("dir")
    b.add_argument("--modes", default="nondiag,uniform,none")
    b.add_argument("--tol", type=float)
    b.add_argument("--maxit", type=int)
    b.add_argument("--csv", required=True)
    b.set_defaults(func=cmd_bench)

    p = sub.add_parser("profile", help="performance profile from bench CSV files")
    p.add_argument("csv", nargs="+")
    p.add_argument("--metric", choices=["time", "iter"], default="time")
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:       # argparse reports usage errors with 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
    except (MPSParseError, InfeasibleBounds, UnicodeDecodeError) as exc:
        log.error("cannot read problem: %s", exc)
    except OSError as exc:
        log.error("%s", exc)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
