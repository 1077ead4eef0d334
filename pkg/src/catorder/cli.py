"""Command line: ``analyze``, ``simulate`` and ``benchmark``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

from .core import CI_METHODS, AnalysisConfig, DataError, ObservationSet, fsig, group_by_category
from .dominance import DECISION_METHODS, DominanceResult, infer_dominance
from .resampling import RngStream
from .simulation import NOISE_GRID, ScenarioSpec, generate_scenario, run_benchmark, timing_benchmark

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- ingestion -------------------------------------------------------------

def parse_csv(path) -> ObservationSet:
    """Read a ``category,value`` CSV file into an :class:`ObservationSet`."""
    try:
        with open(path, encoding="utf-8-sig", newline="") as fh:
            return _parse_rows(fh)
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc.reason})") from None


def _parse_rows(fh) -> ObservationSet:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        raise DataError("empty dataset")
    if [h.strip() for h in header] != ["category", "value"]:
        raise DataError(f"bad header: expected 'category,value', got {','.join(header)!r}")
    cats, vals = [], []
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        line = reader.line_num
        if len(row) != 2:
            raise DataError(f"parse error at line {line}: expected 2 fields, got {len(row)}")
        try:
            v = float(row[1])
        except ValueError:
            raise DataError(f"parse error at line {line}: {row[1]!r} is not a number") from None
        if not math.isfinite(v):
            raise DataError(f"invalid value at line {line}: {row[1]!r}")
        cats.append(row[0])
        vals.append(v)
    if not vals:
        raise DataError("empty dataset")
    return ObservationSet(tuple(cats), vals)


# --- exports ---------------------------------------------------------------

def result_json(res: DominanceResult) -> str:
    return json.dumps(res.to_dict(), indent=2) + "\n"


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def result_dot(res: DominanceResult) -> str:
    lines = ["digraph dominance {", "  rankdir=TB;"]
    for c, m in zip(res.order, res.means):
        lines.append(f"  {_dot_quote(c)} [label={_dot_quote(c + ' mean=' + fsig(m))}];")
    for i, j in res.network.sorted_edges():
        lines.append(f"  {_dot_quote(i)} -> {_dot_quote(j)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


CI_TABLE_COLUMNS = [
    "kind", "low_category", "high_category", "point_estimate",
    "lower", "upper", "level", "method", "fallback",
]


def result_ci_table(res: DominanceResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CI_TABLE_COLUMNS)

    def row(kind, low, high, ci):
        w.writerow([
            kind, low, high, fsig(ci.point_estimate), fsig(ci.lower), fsig(ci.upper),
            fsig(ci.level), ci.method, int(ci.fallback),
        ])

    for c in res.order:
        row("mean", c, "", res.mean_cis[c])
    for pr in res.pairs:
        row("diff", pr.low, pr.high, pr.diff_ci)
    return buf.getvalue()


@contextmanager
def _sink(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# --- commands --------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = AnalysisConfig(args.alpha, args.reps, args.ci, args.seed)
    obs = parse_csv(args.input)
    res = infer_dominance(group_by_category(obs), cfg, RngStream(cfg.seed), n_jobs=args.jobs)
    with _sink(args.out) as fh:
        fh.write(result_json(res))
    if args.dot:
        with _sink(args.dot) as fh:
            fh.write(result_dot(res))
    if args.ci_table:
        with _sink(args.ci_table) as fh:
            fh.write(result_ci_table(res))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not 0.0 <= args.p1 <= 0.5:
        raise UsageError(f"--p1 must lie in [0, 0.5], got {args.p1}")
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    spec = ScenarioSpec(n_per_category=args.n).with_noise(args.p1)
    obs = generate_scenario(spec, RngStream(args.seed))
    with _sink(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["category", "value"])
        for c, v in obs.records:
            w.writerow([c, repr(v)])
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if args.mode == "accuracy":
        if args.sizes is not None:
            raise UsageError("--sizes only applies to --mode timing")
        methods = args.methods or list(DECISION_METHODS)
        unknown = [m for m in methods if m not in DECISION_METHODS]
        if unknown:
            raise UsageError(f"unknown method: {unknown[0]}")
        grid = args.p1_grid or list(NOISE_GRID)
        if any(not 0.0 <= p <= 0.5 for p in grid):
            raise UsageError("--p1-grid values must lie in [0, 0.5]")
        cfg = AnalysisConfig(args.alpha, args.reps or 1000, "percentile", args.seed)
        report = run_benchmark(
            methods,
            grid,
            args.datasets if args.datasets is not None else 100,
            ScenarioSpec(n_per_category=args.n_per_cat if args.n_per_cat is not None else 100),
            cfg,
            n_jobs=args.jobs,
        )
    else:
        for flag in ("methods", "p1_grid", "datasets", "n_per_cat"):
            if getattr(args, flag) is not None:
                raise UsageError(f"--{flag.replace('_', '-')} only applies to --mode accuracy")
        sizes = args.sizes or [1000, 10000]
        if any(n < 1 for n in sizes):
            raise UsageError("--sizes must be positive")
        report = timing_benchmark(sizes, args.reps or 4000, args.seed, alpha=args.alpha)
    with _sink(args.out) as fh:
        report.write_csv(fh)
    if args.json:
        with _sink(args.json) as fh:
            fh.write(report.to_json() + "\n")
    return EXIT_OK


# --- argument parsing ------------------------------------------------------

def _list_of(kind):
    def parse(text):
        try:
            return [kind(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list: {text!r}") from None
    return parse


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _alpha(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="catorder", description="Infer dominance orders between categories of real values.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="infer the dominance network of a category,value CSV")
    a.add_argument("--input", required=True)
    a.add_argument("--alpha", type=_alpha, default=0.05)
    a.add_argument("--reps", type=_positive, default=1000)
    a.add_argument("--ci", choices=CI_METHODS, default="percentile")
    a.add_argument("--seed", type=_u64, default=0)
    a.add_argument("--out", help="JSON result (default: stdout)")
    a.add_argument("--dot", help="write the network as Graphviz DOT")
    a.add_argument("--ci-table", help="write the interval ladder as CSV")
    a.add_argument("--jobs", type=int, default=None)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="write a synthetic five-category dataset")
    s.add_argument("--p1", type=float, default=0.01)
    s.add_argument("--n", type=int, default=100, help="values per category")
    s.add_argument("--seed", type=_u64, default=0)
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("benchmark", help="method comparison or CI timing")
    b.add_argument("--mode", choices=("accuracy", "timing"), default="accuracy")
    b.add_argument("--methods", type=_list_of(str))
    b.add_argument("--p1-grid", type=_list_of(float))
    b.add_argument("--datasets", type=_positive)
    b.add_argument("--n-per-cat", type=_positive)
    b.add_argument("--sizes", type=_list_of(int))
    b.add_argument("--reps", type=_positive)
    b.add_argument("--alpha", type=_alpha, default=0.05)
    b.add_argument("--seed", type=_u64, default=0)
    b.add_argument("--out", default="-", help="CSV path (default: stdout)")
    b.add_argument("--json", help="also write the report as JSON")
    b.add_argument("--jobs", type=int, default=None)
    b.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
