"""Command-line front end.

Subcommands: ``run`` (full power study with CSV/JSON/SVG output),
``eval`` (one statistic on one count vector), ``null`` (critical bracket
for one statistic), ``rank`` (rank statistics from a results CSV), and
``list-stats`` / ``list-alts``.

Exit status: 0 on success, 1 on usage errors, 2 when exact enumeration
exceeds its budget or a distribution cannot bracket the level.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import sys
from pathlib import Path

import numpy as np

from .alternatives import BUILTIN_NAMES, builtin_alternative, normalize
from .errors import BracketError, CapacityError
from .nulldist import (
    critical_bracket,
    exact_null_distribution,
    mc_null_distribution,
)
from .report import emit_csv, emit_json, format_number, write_figures
from .sampling import SeedSpec
from .stats import STUDY_KINDS, NullModel, StatisticKind, evaluate
from .study import StudyConfig, group_kinds_by_power, run_study

__all__ = ["cli_main", "main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _suggest(name: str, valid) -> str:
    close = difflib.get_close_matches(name, list(valid), n=3, cutoff=0.4)
    hint = f" (did you mean: {', '.join(close)}?)" if close else ""
    return f"unknown name {name!r}{hint}; valid names: {', '.join(valid)}"


def _resolve_kind(name: str) -> StatisticKind:
    try:
        return StatisticKind.from_name(name)
    except ValueError:
        raise _UsageError(
            _suggest(name, [k.value for k in StatisticKind])) from None


def _resolve_alternative(name: str):
    try:
        return builtin_alternative(name)
    except ValueError:
        raise _UsageError(_suggest(name, BUILTIN_NAMES)) from None


def _parse_int_list(text: str, label: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise _UsageError(f"--{label} expects comma-separated integers") from None
    if not values:
        raise _UsageError(f"--{label} is empty")
    return values


def _parse_float_list(text: str, label: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise _UsageError(f"--{label} expects comma-separated numbers") from None
    if not values:
        raise _UsageError(f"--{label} is empty")
    return values


def _cmd_run(args) -> int:
    if args.stats is None:
        kinds = STUDY_KINDS
    elif args.stats.strip().lower() == "all":
        kinds = tuple(StatisticKind)
    else:
        kinds = tuple(_resolve_kind(tok) for tok in args.stats.split(","))
    if args.alts is None:
        alts = tuple(builtin_alternative(n) for n in BUILTIN_NAMES
                     if n != "uniform")
    elif args.alts.strip().lower() == "all":
        alts = tuple(builtin_alternative(n) for n in BUILTIN_NAMES)
    else:
        alts = tuple(_resolve_alternative(tok) for tok in args.alts.split(","))
    cfg = StudyConfig(
        kinds=kinds,
        alternatives=alts,
        sample_sizes=_parse_int_list(args.sizes, "sizes"),
        reps_power=args.reps,
        reps_null=args.null_reps,
        alpha=args.alpha,
        master_seed=args.seed,
        exact_threshold=args.exact_threshold,
    )
    result = run_study(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.format in ("csv", "both"):
        written.append(emit_csv(result, out_dir / "results.csv"))
    if args.format in ("json", "both"):
        written.append(emit_json(result, out_dir / "results.json"))
    if args.figures:
        written.extend(write_figures(result, out_dir))
    for path in written:
        print(path)
    return 0


def _cmd_eval(args) -> int:
    counts = _parse_int_list(args.obs, "obs")
    if any(c < 0 for c in counts):
        raise _UsageError("--obs counts must be nonnegative")
    n_total = sum(counts)
    if n_total < 1:
        raise _UsageError("--obs counts must sum to a positive sample size")
    kind = _resolve_kind(args.stat)
    if args.probs is not None:
        p0 = normalize(np.array(_parse_float_list(args.probs, "probs")))
        if len(p0) != len(counts):
            raise _UsageError(
                f"--probs has {len(p0)} cells, --obs has {len(counts)}")
        model = NullModel(N=n_total, p0=p0)
    elif args.null == "uniform":
        model = NullModel.uniform(len(counts), n_total)
    else:
        raise _UsageError(f"unknown null {args.null!r}; use uniform or --probs")
    print(format_number(evaluate(kind, np.array(counts), model)))
    return 0


def _cmd_null(args) -> int:
    kind = _resolve_kind(args.stat)
    model = NullModel.uniform(args.k, args.n)
    if args.exact:
        dist = exact_null_distribution(kind, model)
    else:
        dist = mc_null_distribution(kind, model, args.reps, SeedSpec(args.seed))
    br = critical_bracket(dist, args.alpha)
    print(f"statistic={kind.value} n={model.N} k={model.k} "
          f"alpha={format_number(args.alpha)} source={dist.source} "
          f"c_liberal={format_number(br.c_liberal)} "
          f"alpha_liberal={format_number(br.alpha_liberal)} "
          f"c_conservative={format_number(br.c_conservative)} "
          f"alpha_conservative={format_number(br.alpha_conservative)} "
          f"exact_hit={'true' if br.exact_hit else 'false'}")
    return 0


def _cmd_rank(args) -> int:
    path = Path(args.infile)
    if not path.exists():
        raise _UsageError(f"no such file: {path}")
    powers: dict[StatisticKind, float] = {}
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            if row.get("alternative") != args.alt:
                continue
            if int(row["n"]) != args.n:
                continue
            powers[_resolve_kind(row["statistic"])] = float(
                row["power_interpolated"])
    if not powers:
        raise _UsageError(
            f"no rows for alternative={args.alt!r} n={args.n} in {path}")
    for rank, group in enumerate(group_kinds_by_power(powers, args.tie), 1):
        cells = " ".join(f"{kind.value}={format_number(powers[kind])}"
                         for kind in group)
        print(f"{rank}: {cells}")
    return 0


def _cmd_list_stats(args) -> int:
    for kind in StatisticKind:
        marker = "*" if kind in STUDY_KINDS else " "
        print(f"{kind.value:16s} {marker} {kind.display_name}")
    return 0


def _cmd_list_alts(args) -> int:
    for name in BUILTIN_NAMES:
        spec = builtin_alternative(name)
        row = " ".join(format_number(x) for x in spec.raw)
        print(f"{name:12s} raw_sum={format_number(spec.raw_sum)}  {row}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="gofpower",
        description="Goodness-of-fit statistics and their Monte Carlo power "
                    "against trend alternatives.",
    )
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run the power study grid")
    p_run.add_argument("--reps", type=int, default=10_000,
                       help="alternative replications per grid cell")
    p_run.add_argument("--null-reps", type=int, default=10_000,
                       help="null replications when Monte Carlo is used")
    p_run.add_argument("--seed", type=int, default=0, help="master seed")
    p_run.add_argument("--sizes", default="10,20,30,50,100,200",
                       help="comma-separated sample sizes")
    p_run.add_argument("--alts", default=None,
                       help="comma-separated alternative names, or 'all'")
    p_run.add_argument("--stats", default=None,
                       help="comma-separated statistic names, or 'all'")
    p_run.add_argument("--alpha", type=float, default=0.05)
    p_run.add_argument("--exact-threshold", type=int, default=20_000_000,
                       help="max composition count for exact null")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--format", choices=("csv", "json", "both"),
                       default="both")
    p_run.add_argument("--figures", action="store_true",
                       help="also write power_<alternative>.svg figures")
    p_run.set_defaults(func=_cmd_run)

    p_eval = sub.add_parser("eval", help="evaluate one statistic")
    p_eval.add_argument("--stat", required=True)
    p_eval.add_argument("--obs", required=True,
                        help="comma-separated observed counts")
    p_eval.add_argument("--null", default="uniform")
    p_eval.add_argument("--probs", default=None,
                        help="explicit null cell weights (normalized)")
    p_eval.set_defaults(func=_cmd_eval)

    p_null = sub.add_parser("null", help="critical bracket for one statistic")
    p_null.add_argument("--stat", required=True)
    p_null.add_argument("--n", type=int, required=True)
    p_null.add_argument("--k", type=int, default=10)
    p_null.add_argument("--exact", action="store_true",
                        help="enumerate the null exactly")
    p_null.add_argument("--reps", type=int, default=10_000)
    p_null.add_argument("--seed", type=int, default=0)
    p_null.add_argument("--alpha", type=float, default=0.05)
    p_null.set_defaults(func=_cmd_null)

    p_rank = sub.add_parser("rank", help="rank statistics from a results CSV")
    p_rank.add_argument("--in", dest="infile", required=True)
    p_rank.add_argument("--alt", required=True)
    p_rank.add_argument("--n", type=int, required=True)
    p_rank.add_argument("--tie", type=float, default=0.01)
    p_rank.set_defaults(func=_cmd_rank)

    sub.add_parser("list-stats", help="list statistic names").set_defaults(
        func=_cmd_list_stats)
    sub.add_parser("list-alts", help="list alternative profiles").set_defaults(
        func=_cmd_list_alts)
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_help()
            return 1
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse -h/--help
        code = exc.code
        return 0 if code in (None, 0) else int(code)
    except (CapacityError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
