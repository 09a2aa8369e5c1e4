"""Command line: build, query, scan, calibrate, bench, generate.

Exit codes: 0 success, 1 usage error, 2 data error, 3 scan/index mismatch.
Matches and CSV go to stdout; progress and summaries go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from .bench import BenchSpec, calibrate_epsilon, generate_random_walk, run_benchmark, write_report
from .exceptions import ConfigError, DataError, EquivalenceError
from .index import build_index, load_index, save_index
from .ldmbr import BuildConfig
from .matching import indexed_match, ld_seq_scan
from .timeseries import load_series, save_series

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="data series file")
    p.add_argument("--format", choices=("plain", "csv"), default="plain")
    p.add_argument("--column", type=int, default=0, help="0-based csv column")
    p.add_argument("--skip-header", action="store_true", help="drop the first csv row")


def _load_data(args):
    return load_series(args.data, args.format, args.column, args.skip_header)


def _load_query(args):
    return load_series(args.query, "plain")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ldmatch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build an LD-MBR index over a series")
    _add_data_args(p)
    p.add_argument("--omega", type=_positive_int, required=True)
    p.add_argument("--features", type=_positive_int, default=8)
    p.add_argument("--lmin", type=_positive_int, required=True)
    p.add_argument("--lmax", type=_positive_int, required=True)
    p.add_argument("--out", required=True, help="index file to write")

    p = sub.add_parser("query", help="index-based matching")
    p.add_argument("--index", required=True)
    _add_data_args(p)
    p.add_argument("--query", required=True, help="query series (plain format)")
    p.add_argument("--epsilon", type=_non_negative_float, required=True)
    p.add_argument("--verify", action="store_true", help="also run the sequential scan and compare")

    p = sub.add_parser("scan", help="sequential-scan matching")
    _add_data_args(p)
    p.add_argument("--query", required=True)
    p.add_argument("--epsilon", type=_non_negative_float, required=True)

    p = sub.add_parser("calibrate", help="tolerance for a target selectivity")
    _add_data_args(p)
    p.add_argument("--query", required=True)
    p.add_argument("--selectivity", type=float, required=True)

    p = sub.add_parser("bench", help="scan vs. index benchmark, CSV report")
    p.add_argument("--spec", help="TOML file with BenchSpec fields (optionally under [bench])")
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--omega", type=_positive_int)
    p.add_argument("--features", type=_positive_int, dest="f")
    p.add_argument("--lmin", type=_positive_int, dest="l_min")
    p.add_argument("--lmax", type=_positive_int, dest="l_max")
    p.add_argument("--query-lengths", help="comma separated")
    p.add_argument("--selectivities", help="comma separated")
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--data", dest="data_path")
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("generate", help="write a seeded random walk")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--out", required=True)
    return parser


def _print_matches(result) -> None:
    out = sys.stdout
    for offset, dist in zip(result.offsets.tolist(), result.distances.tolist()):
        out.write(f"{offset}\t{dist:.9g}\n")


def cmd_build(args) -> int:
    try:
        cfg = BuildConfig(args.omega, args.features, args.lmin, args.lmax)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    s = _load_data(args)
    if s.n < cfg.l_min:
        raise UsageError(f"series length {s.n} is shorter than --lmin {cfg.l_min}")
    t0 = time.perf_counter()
    idx = build_index(s, cfg)
    elapsed = time.perf_counter() - t0
    save_index(idx, args.out)
    print(f"records={len(idx)} build_s={elapsed:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_query(args) -> int:
    idx = load_index(args.index)
    s = _load_data(args)
    q = _load_query(args)
    meta = idx.meta
    if not meta.l_min <= q.n <= meta.l_max:
        raise UsageError(
            f"query length {q.n} is outside the index's admissible range [{meta.l_min}, {meta.l_max}]; "
            "rebuild the index with a wider --lmin/--lmax"
        )
    result = indexed_match(idx, s, q, args.epsilon)
    if args.verify:
        truth = ld_seq_scan(s, q, args.epsilon)
        if not np.array_equal(truth.offsets, result.offsets):
            raise EquivalenceError(
                "indexed result differs from the sequential scan",
                {
                    "index": args.index,
                    "data": args.data,
                    "query": args.query,
                    "epsilon": args.epsilon,
                    "missing": np.setdiff1d(truth.offsets, result.offsets).tolist(),
                    "extra": np.setdiff1d(result.offsets, truth.offsets).tolist(),
                },
            )
    _print_matches(result)
    st = result.stats
    print(
        f"matches={len(result)} candidates={st.candidates} post_processed={st.post_processed} "
        f"query_ms={st.query_s * 1e3:.3f} post_ms={st.post_s * 1e3:.3f}"
        + (" verified" if args.verify else ""),
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_scan(args) -> int:
    s = _load_data(args)
    q = _load_query(args)
    if q.n > s.n:
        raise UsageError(f"query length {q.n} exceeds series length {s.n}")
    result = ld_seq_scan(s, q, args.epsilon)
    _print_matches(result)
    print(f"matches={len(result)} scan_ms={result.stats.query_s * 1e3:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if not 0 < args.selectivity <= 1:
        raise UsageError(f"--selectivity must lie in (0, 1], got {args.selectivity}")
    s = _load_data(args)
    q = _load_query(args)
    if q.n > s.n:
        raise UsageError(f"query length {q.n} exceeds series length {s.n}")
    eps = calibrate_epsilon(s, q, args.selectivity)
    matches = len(ld_seq_scan(s, q, eps))
    print(f"epsilon\t{eps!r}")
    print(f"matches\t{matches}")
    print(f"selectivity={matches / (s.n - q.n + 1):.6g}", file=sys.stderr)
    return EXIT_OK


def _bench_spec(args) -> BenchSpec:
    values = {}
    if args.spec:
        values.update(BenchSpec.from_toml(args.spec).__dict__)
    for key in ("n", "omega", "f", "l_min", "l_max", "trials", "seed", "sigma", "data_path"):
        value = getattr(args, key)
        if value is not None:
            values[key] = value
    try:
        if args.query_lengths:
            values["query_lengths"] = [int(x) for x in args.query_lengths.split(",")]
        if args.selectivities:
            values["selectivities"] = [float(x) for x in args.selectivities.split(",")]
        return BenchSpec.from_mapping(values)
    except (ConfigError, ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_bench(args) -> int:
    spec = _bench_spec(args)
    rows = run_benchmark(spec)
    write_report(rows, args.out if args.out else sys.stdout)
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        s = generate_random_walk(args.n, args.seed, args.sigma)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    save_series(s, args.out)
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "query": cmd_query,
    "scan": cmd_scan,
    "calibrate": cmd_calibrate,
    "bench": cmd_bench,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ldmatch {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"ldmatch {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EquivalenceError as exc:
        print(f"ldmatch {args.command}: {exc}", file=sys.stderr)
        print(json.dumps(exc.bundle, sort_keys=True), file=sys.stderr)
        return EXIT_MISMATCH
    except (DataError, OSError) as exc:
        print(f"ldmatch {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
