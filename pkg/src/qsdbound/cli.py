"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical
failure.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from itertools import combinations

from .bounds import barnum_knill_upper, bound_report, copies_needed, montanaro_lower, multicopy_floor, pairwise_fidelities
from .ensemble import load_ensemble, make_rng, random_ensemble
from .errors import NumericalError, ParseError, ValidationError
from .measurement import optimize_measurement
from .verify import run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_HEADER = ["seed", "n", "dim", "lower", "optimized", "upper", "min_fidelity", "seconds"]


class ConfigError(ValidationError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    trials: int = 100
    n_range: tuple = (2, 5)
    dim_range: tuple = (2, 6)
    state_kind: str = "pure"
    prior_kind: str = "uniform"
    seed: int = 0
    optimize: bool = False
    output_path: str = None
    format: str = "csv"
    timing: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}", "--trials")
        for name, (lo, hi) in (("--n", self.n_range), ("--dim", self.dim_range)):
            if lo < 1 or hi < lo:
                raise ConfigError(f"empty or invalid range [{lo}, {hi}]", f"{name}-min/{name}-max")
        if self.state_kind not in ("pure", "mixed"):
            raise ConfigError(f"unknown kind {self.state_kind!r}", "--kind")
        if self.prior_kind not in ("uniform", "dirichlet"):
            raise ConfigError(f"unknown prior kind {self.prior_kind!r}", "--priors")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}", "--format")


def _num(x):
    return "" if x is None else format(x, ".17g")


def sweep_trial(config, index):
    """One sweep row; trial ``index`` is seeded with ``config.seed + index``."""
    seed = config.seed + index
    rng = make_rng(seed)
    n = int(rng.integers(config.n_range[0], config.n_range[1] + 1))
    dim = int(rng.integers(config.dim_range[0], config.dim_range[1] + 1))
    t0 = time.perf_counter()
    e = random_ensemble(n, dim, config.state_kind, config.prior_kind, seed=int(rng.integers(0, 2**62)))
    fid = pairwise_fidelities(e)
    off = [fid[i, j] for i, j in combinations(range(n), 2)]
    row = {
        "seed": seed,
        "n": n,
        "dim": dim,
        "lower": montanaro_lower(e, fid),
        "optimized": optimize_measurement(e).error_probability if config.optimize else None,
        "upper": barnum_knill_upper(e, fid),
        "min_fidelity": min(off) if off else None,
    }
    row["seconds"] = round(time.perf_counter() - t0, 3) if config.timing else None
    return row


def run_sweep(config):
    return [sweep_trial(config, t) for t in range(config.trials)]


def format_sweep(rows, config):
    if config.format == "json":
        doc = {"header": SWEEP_HEADER, "rows": rows}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([r["seed"], r["n"], r["dim"]] + [_num(r[k]) for k in SWEEP_HEADER[3:7]]
                   + ["" if r["seconds"] is None else f"{r['seconds']:.3f}"])
    return buf.getvalue()


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args):
    e = load_ensemble(args.ensemble)
    report = bound_report(e, optimize=args.optimize, seed=args.seed,
                          max_iters=args.max_iters, cert_tol=args.cert_tol)
    _emit(report.to_json(indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args):
    config = SweepConfig(
        trials=args.trials,
        n_range=(args.n_min, args.n_max),
        dim_range=(args.dim_min, args.dim_max),
        state_kind=args.kind,
        prior_kind=args.priors,
        seed=args.seed,
        optimize=args.optimize,
        output_path=args.out,
        format=args.format,
        timing=not args.no_timing,
    )
    _emit(format_sweep(run_sweep(config), config), config.output_path)
    return EXIT_OK


def cmd_verify(args):
    if args.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {args.trials}", "--trials")
    report = run_suite(trials=args.trials, seed=args.seed, tol=args.tol, names=args.check or None)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    for c in report["checks"]:
        if not c["passed"]:
            value = c.get("min_slack", c.get("max_residual"))
            print(f"FAIL {c['name']}: {value:.3e} (reproduce with --check {c['name']} --seed {c['worst_seed']} --trials 1)",
                  file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_copies(args):
    bound = copies_needed(args.fidelity, args.epsilon)
    ceiling = max(0, math.ceil(bound))
    doc = {"fidelity_floor": args.fidelity, "epsilon": args.epsilon, "bound": bound, "ceiling": ceiling}
    if args.n is not None:
        doc["n"] = args.n
        doc["error_floor"] = multicopy_floor(args.n, args.fidelity, ceiling)
    if args.format == "json":
        text = json.dumps(doc) + "\n"
    else:
        text = f"copies needed >= {bound:.17g}\nceiling: {ceiling}\n"
        if args.n is not None:
            text += f"error floor with {ceiling} copies of {args.n} states: {doc['error_floor']:.17g}\n"
    _emit(text, None)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qsdbound",
        description="Bounds on the minimum error of quantum state discrimination.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("bounds", help="bound report for an ensemble file", formatter_class=fmt)
    p.add_argument("--ensemble", required=True, metavar="PATH", help="ensemble JSON file")
    p.add_argument("--optimize", action="store_true", help="also run the measurement optimizer")
    p.add_argument("--seed", type=int, default=None, help="recorded in the report metadata")
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--cert-tol", type=float, default=1e-7)
    p.add_argument("--out", metavar="PATH", default=None, help="write here instead of stdout")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="seeded Monte-Carlo sweep over random ensembles", formatter_class=fmt)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--dim-min", type=int, default=2)
    p.add_argument("--dim-max", type=int, default=6)
    p.add_argument("--kind", choices=["pure", "mixed"], default="pure")
    p.add_argument("--priors", choices=["uniform", "dirichlet"], default="uniform")
    p.add_argument("--seed", type=int, default=0, help="trial t uses seed + t")
    p.add_argument("--optimize", action="store_true", help="fill the optimized column")
    p.add_argument("--out", metavar="PATH", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="randomized checks of every step of the bound's proof", formatter_class=fmt)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--check", action="append", metavar="NAME", help="run only this check (repeatable)")
    p.add_argument("--out", metavar="PATH", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("copies", help="copies needed to reach a target error", formatter_class=fmt)
    p.add_argument("--fidelity", type=float, required=True, help="pairwise fidelity floor F in (0, 1)")
    p.add_argument("--epsilon", type=float, required=True, help="target error probability in (0, 1)")
    p.add_argument("--n", type=int, default=None, help="number of equiprobable states")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_copies)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
