"""Command-line interface.

Exit codes: 0 success, 1 an enabled check failed, 2 usage or configuration
error, 3 internal error.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import LIMIT, oracle_law, oracle_seed
from .harness import (
    SCHEMA_VERSION,
    ConfigError,
    RunError,
    format_summary,
    load_config,
    parse_config,
    run_experiment,
)
from .inference import approx_p_value, basic_ci, bootstrap_test
from .metrics import DiscreteMeasure, bl_distance, kolmogorov_distance
from .metrics.bounded_lipschitz import set_lp_perturbation
from .selftest import run_selftest
from .statistics import ReplicateSet

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

SCHEMA_NOTE = f"config schema version {SCHEMA_VERSION}"


class InputError(ValueError):
    """Malformed measure or replicate file."""


def read_columns(path) -> np.ndarray:
    """Whitespace-separated numeric columns; '#' starts a comment."""
    rows = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].split()
        if not body:
            continue
        try:
            rows.append([float(tok) for tok in body])
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number in {line.strip()!r}") from None
        if len(rows[-1]) != len(rows[0]):
            raise InputError(f"{path}:{lineno}: expected {len(rows[0])} columns")
    if not rows:
        raise InputError(f"{path}: no data rows")
    arr = np.array(rows)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: values must be finite")
    return arr


def read_measure(path) -> DiscreteMeasure:
    """One column: sample values (empirical measure); two: support and
    probability; three: planar support and probability."""
    arr = read_columns(path)
    try:
        if arr.shape[1] == 1:
            return DiscreteMeasure.from_samples(arr[:, 0])
        if arr.shape[1] == 2:
            return DiscreteMeasure(arr[:, 0], arr[:, 1])
        if arr.shape[1] == 3:
            return DiscreteMeasure(arr[:, :2], arr[:, 2])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    raise InputError(f"{path}: expected 1, 2 or 3 columns, got {arr.shape[1]}")


def cmd_metric(args) -> int:
    p = read_measure(args.p)
    q = read_measure(args.q)
    if p.dim != q.dim:
        raise InputError("the two measures live in different dimensions")
    if args.metric == "kolmogorov":
        d = kolmogorov_distance(p, q)
    else:
        d = bl_distance(p, q, args.ground)
    print(f"{d:.9f}")
    return EXIT_OK


def cmd_infer(args) -> int:
    arr = read_columns(args.replicates)
    if arr.shape[1] != 1:
        raise InputError(f"{args.replicates}: expected one column of replicate values")
    if not 0.0 < args.alpha < 0.5:
        raise InputError("--alpha must lie in (0, 0.5)")
    if args.n < 1:
        raise InputError("--n must be >= 1")
    rs = ReplicateSet(args.stat, arr[:, 0], args.n)
    theta_n = args.stat if args.theta_n is None else args.theta_n
    ci = basic_ci(theta_n, rs, args.alpha)
    test = bootstrap_test(rs, args.alpha)
    print(f"ci_lower {ci.lower:.9g}")
    print(f"ci_upper {ci.upper:.9g}")
    print(f"level {ci.level:.9g}")
    print(f"critical {test.critical:.9g}")
    print(f"reject {'true' if test.reject else 'false'}")
    print(f"p_value {approx_p_value(rs):.9g}")
    return EXIT_OK


def _config(args):
    if args.config is None:
        cfg = parse_config({"scenario": "MeanRoot"})
    else:
        cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def cmd_run(args) -> int:
    cfg = _config(args)
    if args.workers is not None and args.workers < 1:
        raise InputError("--workers must be >= 1")
    start = time.perf_counter()
    result, summary = run_experiment(cfg, args.out, args.workers)
    print(f"# bootcheck {__version__}, {SCHEMA_NOTE}")
    for line in result.config.to_yaml().splitlines():
        print(f"# {line}")
    print(format_summary(summary))
    print(f"# records: {result.files['records']}", file=sys.stderr)
    print(f"# elapsed: {time.perf_counter() - start:.1f} s", file=sys.stderr)
    return EXIT_OK if summary.passed else EXIT_CHECK


def cmd_oracle(args) -> int:
    cfg = _config(args)
    n = LIMIT if args.n == LIMIT else _positive_int(args.n, "--n")
    reps = cfg.ladder.oracle_reps if args.reps is None else _positive_int(args.reps, "--reps")
    seed = oracle_seed(cfg.seed, cfg.scenario, n, reps)
    law = oracle_law(cfg.scenario, n, reps, seed, cfg.ladder.n_big if n == LIMIT else None)
    lines = [f"# oracle law of {cfg.scenario.id.value} at n={n}, R={reps}, seed={cfg.seed}"]
    lines += [f"{float(x)!r} {float(p)!r}" for x, p in zip(law.support, law.probs)]
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def _positive_int(value, flag: str) -> int:
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise InputError(f"{flag} expects a positive integer") from None
    if v < 1:
        raise InputError(f"{flag} expects a positive integer")
    return v


def cmd_selftest(args) -> int:
    if args.perturb_lp:
        set_lp_perturbation(args.perturb_lp)
    results = run_selftest(args.seed)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("selftest passed" if ok else "selftest FAILED")
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bootcheck",
        description="Monte Carlo diagnostics of bootstrap consistency.",
        epilog=SCHEMA_NOTE,
    )
    parser.add_argument("--version", action="version", version=f"bootcheck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, description=help_text, epilog=SCHEMA_NOTE)

    p = add("metric", "distance between two measures read from text files")
    p.add_argument("--p", required=True, help="file for P (1, 2 or 3 columns)")
    p.add_argument("--q", required=True, help="file for Q (same layout as P)")
    p.add_argument("--metric", choices=("kolmogorov", "bl"), default="kolmogorov")
    p.add_argument("--ground", choices=("euclidean",), default="euclidean", help="ground metric for bl")
    p.set_defaults(func=cmd_metric)

    p = add("infer", "basic interval, bootstrap test and p-value from replicates")
    p.add_argument("--replicates", required=True, help="file with one replicate value per line")
    p.add_argument("--stat", type=float, required=True, help="observed statistic S_n")
    p.add_argument("--theta-n", type=float, default=None, help="point estimate for the interval (default: --stat)")
    p.add_argument("--alpha", type=float, default=0.1, help="level in (0, 0.5)")
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.set_defaults(func=cmd_infer)

    p = add("run", "full experiment from a YAML config")
    p.add_argument("--config", default=None, help="YAML config (default: MeanRoot with defaults)")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--workers", type=int, default=None, help="worker processes")
    p.add_argument("--out", default=None, help="output directory (default: config output)")
    p.set_defaults(func=cmd_run)

    p = add("oracle", "simulate the oracle law of S_n and write it as a measure file")
    p.add_argument("--config", default=None, help="YAML config naming the scenario")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--n", required=True, help=f"sample size, or '{LIMIT}' for the limit law")
    p.add_argument("--reps", default=None, help="number of draws R (default: config ladder.R)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_oracle)

    p = add("selftest", "metric-oracle and invariant suites at reduced size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--perturb-lp", type=float, default=0.0, metavar="EPS",
        help="test hook: add EPS to every LP optimum (the suite must then fail)",
    )
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"bootcheck: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RunError as exc:
        print(f"bootcheck: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"bootcheck: I/O error: {exc}; records completed so far are in records.partial.jsonl", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"bootcheck: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        set_lp_perturbation(0.0)


if __name__ == "__main__":
    sys.exit(main())
