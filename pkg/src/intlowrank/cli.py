"""Command-line front end.

Subcommands: `ils` (one integer least squares solve), `factorize`
(low-rank factorization of a matrix file, emitting factor files plus a
JSON run report), and the two experiment harnesses that write CSV.
Exit codes: 0 success, 2 parse/parameter error, 3 rank-deficient input,
4 empty box.
"""

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .boxed import BoxConstraint, solve_ilsb
from .exceptions import EmptyBoxError, MatrixParseError, RankDeficientError
from .experiments import (
    compare_experiment,
    distribution_experiment,
    modal_band,
    summarize_residuals,
    trial_seed,
)
from .factorize import (
    STATUS_RANK_DEFICIENT,
    FactorizationConfig,
    as_int_matrix,
    bcd_factorize,
    residual,
)
from .ils import SearchStats, solve_ils
from .matrixio import as_vector, load_matrix, save_matrix

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RANK_DEFICIENT = 3
EXIT_EMPTY_BOX = 4

CSV_SCHEMA_VERSION = 1
FAIL_TOKEN = "FAIL"


class ParameterError(ValueError):
    """Invalid command parameters (exit code 2)."""


def _fmt_num(v):
    if v is None:
        return FAIL_TOKEN
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def _load_float_matrix(path):
    return np.asarray(load_matrix(path), dtype=float)


def _load_int_matrix(path):
    M = load_matrix(path)
    if not np.issubdtype(M.dtype, np.integer):
        raise MatrixParseError(f"{path}: integer entries required")
    return M


def cmd_ils(args):
    H = _load_float_matrix(args.h_file)
    y = as_vector(load_matrix(args.y_file), name="y").astype(float)
    if H.ndim != 2 or H.shape[0] != y.shape[0]:
        raise MatrixParseError(
            f"dimension mismatch: H is {H.shape}, y has length {y.shape[0]}"
        )
    stats = SearchStats()
    if args.box is not None:
        lo, hi = args.box
        box = BoxConstraint.uniform(H.shape[1], lo, hi)
        x, resid_sq = solve_ilsb(H, y, box, stats=stats)
    else:
        x, resid_sq = solve_ils(H, y, stats=stats)
    print("x:", " ".join(str(int(v)) for v in x))
    print(f"residual_sq: {resid_sq:.12g}")
    print(f"residual: {np.sqrt(resid_sq):.12g}")
    print(f"search_nodes: {stats.nodes}")
    return EXIT_OK


def _resolve_init(choice):
    if choice == "most-frequent":
        return "most_frequent"
    if choice == "random":
        return "random"
    return as_int_matrix(_load_int_matrix(choice))


def cmd_factorize(args):
    a_path = Path(args.a_file)
    A = _load_int_matrix(a_path)
    config = FactorizationConfig(
        rank=args.rank,
        max_sweeps=args.max_sweeps,
        box_u=tuple(args.box_u) if args.box_u else None,
        box_v=tuple(args.box_v) if args.box_v else None,
        init=_resolve_init(args.init),
        seed=args.seed,
    )
    started = time.perf_counter()
    try:
        result = bcd_factorize(A, config)
    except (EmptyBoxError, RankDeficientError, MatrixParseError):
        raise
    except ValueError as exc:
        raise ParameterError(str(exc)) from None
    wall = time.perf_counter() - started

    prefix = args.out_prefix or str(a_path.with_suffix(""))
    written = {}
    for name, factor in (("U", result.U), ("V", result.V)):
        if factor is None:
            continue
        path = f"{prefix}.{name}.txt"
        save_matrix(path, factor)
        written[name] = path

    final = result.final_residual
    if result.U is not None and result.V is not None:
        assert final == residual(A, result.U, result.V)
    report = {
        "input": str(a_path),
        "input_sha256": hashlib.sha256(a_path.read_bytes()).hexdigest(),
        "config": {
            "rank": args.rank,
            "max_sweeps": args.max_sweeps,
            "box_u": list(args.box_u) if args.box_u else None,
            "box_v": list(args.box_v) if args.box_v else None,
            "init": args.init,
            "seed": args.seed,
        },
        "residual_history": result.residual_history,
        "final_residual": final,
        "status": result.status,
        "sweeps": result.sweeps,
        "wall_time_s": wall,
        "search_nodes_total": sum(n for *_, n in result.subproblem_nodes),
        "subproblem_nodes": [
            {"sweep": s, "block": b, "index": i, "nodes": n}
            for s, b, i, n in result.subproblem_nodes
        ],
        "factor_files": written,
    }
    report_path = f"{prefix}.report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")

    print(f"status: {result.status}")
    print(f"final_residual: {final if final is not None else 'n/a'}")
    print(f"sweeps: {result.sweeps}")
    print(f"report: {report_path}")
    for name, path in written.items():
        print(f"{name}: {path}")
    return EXIT_OK


def _check_experiment_params(n, rank, lo, hi, trials):
    if n is not None and n < 2:
        raise ParameterError("--n must be at least 2")
    if rank < 1 or (n is not None and rank >= n):
        raise ParameterError("--rank must satisfy 1 <= rank < n")
    if lo > hi:
        raise ParameterError(f"--box interval [{lo}, {hi}] is empty")
    if trials < 1:
        raise ParameterError("--trials must be positive")


def _write_csv(path, comment_lines, header, rows, footer_lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comment_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_num(v) for v in row) + "\n")
        for line in footer_lines:
            fh.write(f"# {line}\n")


def cmd_experiment_distribution(args):
    lo, hi = args.box
    a_matrix = None
    if args.a_file:
        a_matrix = _load_int_matrix(args.a_file)
        n = int(min(a_matrix.shape))
    else:
        if args.n is None:
            raise ParameterError("--n is required unless --a-file is given")
        n = args.n
    _check_experiment_params(n, args.rank, lo, hi, args.trials)

    started = time.perf_counter()
    A, outcomes = distribution_experiment(
        args.rank, lo, hi, args.trials, args.seed, a_matrix=a_matrix, n=args.n
    )
    wall = time.perf_counter() - started
    residuals = [o.residual for o in outcomes]
    summary = summarize_residuals(residuals)
    band = modal_band(residuals)
    source = f"file:{args.a_file}" if args.a_file else f"generated(seed={trial_seed(args.seed, 0)})"
    comments = [
        f"intlowrank distribution-experiment v{CSV_SCHEMA_VERSION}",
        f"a={source} shape={A.shape[0]}x{A.shape[1]} rank={args.rank} "
        f"box=[{lo},{hi}] trials={args.trials} seed={args.seed}",
        "per-trial init seed = seed*1000003 + trial",
    ]
    footer = [
        f"failures: {summary['fail']}",
        f"zero_residual_trials: {sum(1 for r in residuals if r == 0)}",
        f"interval: {summary['interval']}",
        f"average: {_fmt_num(summary['average'])}",
        f"modal_band: {band}",
    ]
    rows = [(o.trial, o.seed, o.residual, o.sweeps, o.status) for o in outcomes]
    _write_csv(args.out, comments, ("trial", "seed", "residual", "sweeps", "status"), rows, footer)
    print(
        f"wrote {args.out}: {args.trials} trials, {summary['fail']} failures, "
        f"wall_time_s={wall:.3f}"
    )
    return EXIT_OK


def cmd_experiment_compare(args):
    lo, hi = args.box
    rank = args.rank if args.rank is not None else max(args.n // 5, 1)
    _check_experiment_params(args.n, rank, lo, hi, args.trials)

    started = time.perf_counter()
    outcomes = compare_experiment(args.n, rank, lo, hi, args.trials, args.seed)
    wall = time.perf_counter() - started
    exact = summarize_residuals([o.residual_exact for o in outcomes])
    base = summarize_residuals([o.residual_baseline for o in outcomes])
    exact_fail = sum(1 for o in outcomes if o.status_exact == STATUS_RANK_DEFICIENT)
    base_fail = sum(1 for o in outcomes if o.status_baseline == STATUS_RANK_DEFICIENT)
    paired = [
        (o.residual_exact, o.residual_baseline)
        for o in outcomes
        if o.residual_exact is not None and o.residual_baseline is not None
    ]
    superior = sum(1 for a, b in paired if a < b)
    percent = 100.0 * superior / len(paired) if paired else float("nan")
    sweeps_avg = sum(o.sweeps_exact for o in outcomes) / len(outcomes)

    comments = [
        f"intlowrank compare-experiment v{CSV_SCHEMA_VERSION}",
        f"n={args.n} rank={rank} box=[{lo},{hi}] trials={args.trials} seed={args.seed}",
        "per-trial seeds: a = seed*1000003 + 2*trial, init = seed*1000003 + 2*trial + 1",
    ]
    header = (
        "trial",
        "a_seed",
        "v0_seed",
        "residual_ilsb",
        "sweeps_ilsb",
        "status_ilsb",
        "residual_baseline",
        "sweeps_baseline",
        "status_baseline",
    )
    rows = [
        (
            o.trial,
            o.a_seed,
            o.v0_seed,
            o.residual_exact,
            o.sweeps_exact,
            o.status_exact,
            o.residual_baseline,
            o.sweeps_baseline,
            o.status_baseline,
        )
        for o in outcomes
    ]
    footer = [
        f"ilsb: sweeps_avg={sweeps_avg:.2f} interval={exact['interval']} "
        f"average={_fmt_num(exact['average'])} fail={exact_fail}",
        f"baseline: interval={base['interval']} "
        f"average={_fmt_num(base['average'])} fail={base_fail}",
        f"percent_superior: {percent:.1f}",
    ]
    _write_csv(args.out, comments, header, rows, footer)
    print(f"wrote {args.out}: percent_superior={percent:.1f}, wall_time_s={wall:.3f}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="intlowrank",
        description="Integer least squares solvers and integer low-rank factorization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ils", help="solve one integer least squares problem")
    p.add_argument("h_file", help="coefficient matrix file")
    p.add_argument("y_file", help="target vector file")
    p.add_argument("--box", nargs=2, type=int, metavar=("L", "U"),
                   help="entrywise interval constraint on x")
    p.set_defaults(func=cmd_ils)

    p = sub.add_parser("factorize", help="integer low-rank factorization of a matrix file")
    p.add_argument("a_file", help="integer data matrix file")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--box-u", nargs=2, type=int, metavar=("L", "U"))
    p.add_argument("--box-v", nargs=2, type=int, metavar=("L", "U"))
    p.add_argument("--init", default="most-frequent",
                   help="most-frequent, random, or a factor file (default: most-frequent)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sweeps", type=int, default=100)
    p.add_argument("--out-prefix", help="default: the data file path without extension")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("experiment-distribution",
                       help="residual distribution over random restarts (CSV)")
    p.add_argument("--n", type=int, help="matrix size when generating A")
    p.add_argument("--a-file", help="use this matrix instead of generating one")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--box", nargs=2, type=int, metavar=("L", "U"), default=(1, 4))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment_distribution)

    p = sub.add_parser("experiment-compare",
                       help="exact block solves vs rounded least squares baseline (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rank", type=int, help="default: n // 5")
    p.add_argument("--box", nargs=2, type=int, metavar=("L", "U"), default=(1, 4))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment_compare)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MatrixParseError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RankDeficientError as exc:
        print(f"error: rank deficient input: {exc}", file=sys.stderr)
        return EXIT_RANK_DEFICIENT
    except EmptyBoxError as exc:
        print(f"error: empty box: {exc}", file=sys.stderr)
        return EXIT_EMPTY_BOX


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    run()
