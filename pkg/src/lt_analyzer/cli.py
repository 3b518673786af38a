"""Command-line front end: ``lt-analyzer <command> ...``.

Exit status is 0 on success, 2 on usage or validation errors and 1 on
numeric failures.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

import numpy as np

from . import degree_dist
from .asymptotic import beta_series, collapse_fraction, curve_csv
from .bounds import default_window, failure_sandwich
from .errors import LTError, NumericError, ValidationError
from .finite_length import failure_probability
from .montecarlo import MODES, default_jobs, simulate
from .sampler import CodeParameters


class _UsageError(Exception):
    pass


def _parse_weights(text: str) -> list[tuple[int, float]]:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            d, p = item.split(":")
            pairs.append((int(d), float(p)))
        except ValueError as exc:
            raise _UsageError(f"bad weight entry {item!r}; expected DEGREE:PROB") from exc
    return pairs


def _add_dist_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("degree distribution (pick one source)")
    g.add_argument("--dist", choices=("ideal", "robust"), help="built-in soliton distribution")
    g.add_argument("--dist-file", type=Path, help="distribution JSON")
    g.add_argument("--weights", help='inline weights, e.g. "1:0.1,2:0.9"')
    g.add_argument("--c", type=float, default=0.05, help="robust soliton constant")
    g.add_argument("--delta-rs", type=float, default=0.5, help="robust soliton failure parameter")


def _add_size_args(p: argparse.ArgumentParser, need_k: bool = True) -> None:
    p.add_argument("--k", type=int, required=need_k, help="number of input symbols")
    m = p.add_mutually_exclusive_group(required=True)
    m.add_argument("--n", type=float, help="expected number of received symbols")
    m.add_argument("--delta", type=float, help="overhead, n = (1 + delta) k")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed (drawn from the OS when omitted)")
    p.add_argument("--out", type=Path, help="write the JSON result here instead of stdout")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lt-analyzer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-dist", help="write a degree distribution as JSON")
    g.add_argument("kind", choices=("ideal", "robust", "file"))
    g.add_argument("--k", type=int)
    g.add_argument("--c", type=float, default=0.05)
    g.add_argument("--delta-rs", type=float, default=0.5)
    g.add_argument("--in", dest="infile", type=Path, help="input JSON for kind=file")
    _add_common(g)

    a = sub.add_parser("asymptotic", help="limiting recovered fraction z*")
    _add_dist_args(a)
    _add_size_args(a, need_k=False)
    a.add_argument("--tol", type=float, default=1e-12)
    a.add_argument("--grid-points", type=int, default=10_000)
    a.add_argument("--curve-points", type=int, default=101, help="rows in the curve CSV")
    a.add_argument("--csv", type=Path, help="write the ripple-fraction curve CSV")
    _add_common(a)

    f = sub.add_parser("finite", help="exact failure probability by dynamic programming")
    _add_dist_args(f)
    _add_size_args(f)
    f.add_argument("--engine", choices=("auto", "naive", "poly"), default="auto")
    f.add_argument("--precision-bits", type=int, default=128)
    f.add_argument("--csv", type=Path, help="write the full Q table CSV")
    _add_common(f)

    b = sub.add_parser("bounds", help="fixed-count failure bounds from Poisson-model values")
    _add_dist_args(b)
    _add_size_args(b)
    b.add_argument("--n1", type=float, help="lower window end (default n - 3 sqrt(n))")
    b.add_argument("--n2", type=float, help="upper window end (default n + 3 sqrt(n))")
    b.add_argument("--engine", choices=("auto", "naive", "poly"), default="auto")
    b.add_argument("--precision-bits", type=int, default=128)
    _add_common(b)

    s = sub.add_parser("simulate", help="Monte Carlo failure rate and decoded fractions")
    _add_dist_args(s)
    _add_size_args(s)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--mode", choices=MODES, default="poisson")
    s.add_argument("--jobs", type=int, help="worker processes (default LT_ANALYZER_JOBS or cores)")
    s.add_argument("--csv", type=Path, help="write the decoded-fraction histogram CSV")
    s.add_argument("--trajectory-csv", type=Path, help="write the mean ripple trajectory CSV")
    _add_common(s)
    return parser


def _dist_from_args(args, k: int | None) -> degree_dist.DegreeDistribution:
    given = [x for x in (args.dist, args.dist_file, args.weights) if x is not None]
    if len(given) != 1:
        raise _UsageError("give exactly one of --dist, --dist-file, --weights")
    if args.dist_file is not None:
        if not args.dist_file.exists():
            raise _UsageError(f"no such file: {args.dist_file}")
        return degree_dist.load(args.dist_file)
    if args.weights is not None:
        return degree_dist.validate(_parse_weights(args.weights), k)
    if k is None:
        raise _UsageError(f"--dist {args.dist} needs --k")
    if args.dist == "ideal":
        return degree_dist.soliton_ideal(k)
    return degree_dist.soliton_robust(k, args.c, args.delta_rs)


def _params(args) -> CodeParameters:
    if args.k is None or args.k < 1:
        raise _UsageError("--k must be a positive integer")
    if args.delta is not None:
        return CodeParameters.from_overhead(args.k, args.delta)
    return CodeParameters(k=args.k, n=args.n)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _emit(args, obj) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True) + "\n"
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_gen_dist(args) -> None:
    if args.kind == "file":
        if args.infile is None:
            raise _UsageError("gen-dist file needs --in")
        if not args.infile.exists():
            raise _UsageError(f"no such file: {args.infile}")
        dist = degree_dist.load(args.infile)
    elif args.k is None:
        raise _UsageError(f"gen-dist {args.kind} needs --k")
    elif args.kind == "ideal":
        dist = degree_dist.soliton_ideal(args.k)
    else:
        dist = degree_dist.soliton_robust(args.k, args.c, args.delta_rs)
    _emit(args, dist.to_json())


def _cmd_asymptotic(args) -> None:
    dist = _dist_from_args(args, args.k)
    if args.delta is not None:
        delta = args.delta
    elif args.k is None:
        raise _UsageError("--n needs --k; or give --delta")
    else:
        delta = args.n / args.k - 1.0
    series = beta_series(dist, delta)
    res = collapse_fraction(series, tol=args.tol, grid_points=args.grid_points)
    out = res.to_dict()
    out["delta"] = delta
    if args.csv is not None:
        if args.curve_points < 2:
            raise _UsageError("--curve-points must be at least 2")
        grid = np.linspace(0.0, 1.0, args.curve_points, endpoint=False)
        args.csv.write_text(curve_csv(series, grid))
    _emit(args, out)


def _cmd_finite(args) -> None:
    params = _params(args)
    dist = _dist_from_args(args, params.k)
    res = failure_probability(
        dist, params, engine=args.engine, precision_bits=args.precision_bits,
        full_table=args.csv is not None,
    )
    if args.csv is not None:
        args.csv.write_text(res.table_csv())
    out = res.to_dict()
    out.update(k=params.k, n=params.n)
    _emit(args, out)


def _cmd_bounds(args) -> None:
    params = _params(args)
    dist = _dist_from_args(args, params.k)
    n = params.n
    lo, hi = default_window(n)
    n1 = lo if args.n1 is None else args.n1
    n2 = hi if args.n2 is None else args.n2
    if not n1 <= n <= n2:
        raise ValidationError(f"need n1 <= n <= n2, got {n1}, {n}, {n2}")

    def p_fail(m):
        p = CodeParameters(k=params.k, n=m)
        return failure_probability(dist, p, engine=args.engine, precision_bits=args.precision_bits).p_error

    f1, f2 = p_fail(n1), p_fail(n2)
    out = failure_sandwich(f1, f2, n, n1, n2).to_dict()
    out.update(k=params.k, p_p_n1=f1, p_p_n2=f2)
    _emit(args, out)


def _cmd_simulate(args) -> None:
    params = _params(args)
    dist = _dist_from_args(args, params.k)
    if args.trials < 1:
        raise _UsageError("--trials must be at least 1")
    seed = _seed(args)
    jobs = default_jobs() if args.jobs is None else args.jobs
    if jobs < 1:
        raise _UsageError("--jobs must be at least 1")
    report, prof = simulate(dist, params, args.trials, seed, mode=args.mode, jobs=jobs)
    if args.csv is not None:
        args.csv.write_text(prof.histogram_csv())
    if args.trajectory_csv is not None:
        args.trajectory_csv.write_text(prof.trajectory_csv())
    _emit(args, report.to_json() + "\n")


_COMMANDS = {
    "gen-dist": _cmd_gen_dist,
    "asymptotic": _cmd_asymptotic,
    "finite": _cmd_finite,
    "bounds": _cmd_bounds,
    "simulate": _cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (NumericError, LTError, ArithmeticError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
