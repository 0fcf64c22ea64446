"""Command-line interface: sample, expect, scan, sphere.

Exit codes: 0 ok, 1 usage error, 2 monotonicity violation, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .distributions import DistributionSpec, sample, write_cloud_csv
from .errors import DegenerateSampleError, DomainError, QuadratureError, QuantileRangeError
from .estimators import DEFAULT_ABS_TOL, expect_mc, expect_quad, monotonicity_scan
from .sphere import euclidean_equivalent

EXIT_OK, EXIT_USAGE, EXIT_NOT_MONOTONE, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "FACETMONO_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    subcommand: str
    spec: DistributionSpec
    n: list[int] = field(default_factory=list)
    n_range: tuple[int, int] | None = None
    method: str = "quad"
    replicates: int = 10000
    abs_tol: float = DEFAULT_ABS_TOL
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "json"

    def to_dict(self) -> dict:
        # workers is left out: output must not depend on it
        out = {"subcommand": self.subcommand, "spec": self.spec.to_dict(), "method": self.method,
               "seed": self.seed, "format": self.format}
        if self.n_range is not None:
            out["n_range"] = list(self.n_range)
        else:
            out["n"] = list(self.n)
        if self.method in ("mc", "both"):
            out["replicates"] = self.replicates
        if self.method in ("quad", "both"):
            out["abs_tol"] = self.abs_tol
        return out


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _n_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid n list {text!r}") from None


def _n_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("n-range must look like LO:HI") from None
    return lo, hi


def _add_spec_args(p, spherical=False):
    if spherical:
        p.add_argument("--alpha", type=float, required=True, help="S-class exponent (> -1)")
    else:
        p.add_argument("--class", dest="family", required=True, choices=list("GHBUS"),
                       help="distribution family")
        p.add_argument("--beta", type=float, help="shape parameter for H (> d/2) and B (> -1)")
        p.add_argument("--alpha", type=float, help="S-class exponent (> -1)")
        p.add_argument("--sigma", type=float, default=1.0, help="scale (not used by S)")
    p.add_argument("--d", type=int, required=True, help="dimension (>= 2)")
    p.add_argument("--seed", type=_seed, default=None,
                   help=f"64-bit seed (default: ${SEED_ENV} or 0)")


def _add_estimation_args(p):
    p.add_argument("--method", choices=["mc", "quad", "both"], default="quad")
    p.add_argument("--replicates", type=int, default=10000)
    p.add_argument("--abs-tol", type=float, default=DEFAULT_ABS_TOL)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["json", "csv"], default=None,
                   help="default: csv for *.csv outputs, json otherwise")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="facetmono",
                     description="Mean facet numbers of random convex hulls")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="write a point cloud as CSV")
    _add_spec_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("expect", help="mean facet number at one or more n")
    _add_spec_args(p)
    p.add_argument("--n", type=_n_list, required=True, help="n or comma-separated list")
    _add_estimation_args(p)

    p = sub.add_parser("scan", help="monotonicity scan over an n range")
    _add_spec_args(p)
    p.add_argument("--n-range", type=_n_range, required=True, help="LO:HI inclusive")
    _add_estimation_args(p)

    p = sub.add_parser("sphere", help="half-sphere model, via its Euclidean equivalent")
    _add_spec_args(p, spherical=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=_n_list)
    group.add_argument("--n-range", type=_n_range)
    _add_estimation_args(p)
    return parser


def _spec_from(args) -> DistributionSpec:
    if args.subcommand == "sphere":
        return DistributionSpec("S", args.d, alpha=args.alpha)
    if args.family in ("G", "U") and args.beta is not None:
        raise UsageError(f"--beta is not used by class {args.family}")
    return DistributionSpec(args.family, args.d, beta=args.beta, alpha=args.alpha, sigma=args.sigma)


def resolve_config(args) -> RunConfig:
    spec = _spec_from(args)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.subcommand == "sample":
        if args.n < 1:
            raise UsageError("--n must be positive")
        return RunConfig("sample", spec, [args.n], seed=seed, out=args.out, format="csv")
    fmt = args.format or ("csv" if (args.out or "").endswith(".csv") else "json")
    cfg = RunConfig(args.subcommand, spec, method=args.method, replicates=args.replicates,
                    abs_tol=args.abs_tol, seed=seed, workers=args.workers, out=args.out, format=fmt)
    n_range = getattr(args, "n_range", None)
    d = spec.d
    if n_range is not None:
        lo, hi = n_range
        if lo < d + 1 or lo >= hi:
            raise UsageError(f"--n-range needs d + 1 = {d + 1} <= LO < HI")
        cfg.n_range = (lo, hi)
    else:
        if not args.n or min(args.n) < d + 1:
            raise UsageError(f"every n must be >= d + 1 = {d + 1}")
        cfg.n = list(args.n)
    if cfg.method in ("mc", "both") and cfg.replicates < 2:
        raise UsageError("--replicates must be at least 2")
    if cfg.abs_tol <= 0:
        raise UsageError("--abs-tol must be positive")
    if cfg.workers < 1:
        raise UsageError("--workers must be positive")
    return cfg


def _finite(x):
    return x if math.isfinite(x) else None


def _agreement(mc, quad):
    diff = mc.value - quad.value
    scale = math.hypot(mc.error, quad.error)
    if scale == 0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return diff / scale


def _paired_row(mc, quad):
    return {"n": mc.n,
            "mc_value": mc.value, "mc_error": mc.error, "mc_effort": mc.effort,
            "quad_value": quad.value, "quad_error": quad.error, "quad_effort": quad.effort,
            "agreement": _finite(_agreement(mc, quad))}


def _estimates(cfg: RunConfig, method: str, n_values):
    if method == "mc":
        return [expect_mc(cfg.spec, n, cfg.replicates, cfg.seed, cfg.workers) for n in n_values]
    return [expect_quad(cfg.spec, n, cfg.abs_tol) for n in n_values]


def _report_base(cfg: RunConfig) -> dict:
    report = {"config": cfg.to_dict(), "spec": cfg.spec.to_dict(), "method": cfg.method,
              "seed": cfg.seed}
    if cfg.spec.family == "S":
        report["equivalent"] = euclidean_equivalent(cfg.spec).to_dict()
    return report


def run_expect(cfg: RunConfig) -> tuple[dict, int]:
    report = _report_base(cfg)
    if cfg.method == "both":
        mc = _estimates(cfg, "mc", cfg.n)
        quad = _estimates(cfg, "quad", cfg.n)
        report["rows"] = [_paired_row(a, b) for a, b in zip(mc, quad)]
        report["degenerate_resamples"] = sum(e.resamples for e in mc)
    else:
        est = _estimates(cfg, cfg.method, cfg.n)
        report["rows"] = [e.row() for e in est]
        report["degenerate_resamples"] = sum(e.resamples for e in est)
    values = [r.get("value", r.get("quad_value")) for r in report["rows"]]
    report["gaps"] = [b - a for a, b in zip(values, values[1:])]
    report["monotone"] = None
    return report, EXIT_OK


def run_scan(cfg: RunConfig) -> tuple[dict, int]:
    lo, hi = cfg.n_range
    report = _report_base(cfg)
    methods = ["mc", "quad"] if cfg.method == "both" else [cfg.method]
    scans = {m: monotonicity_scan(cfg.spec, lo, hi, m, effort=cfg.replicates, seed=cfg.seed,
                                  workers=cfg.workers, abs_tol=cfg.abs_tol) for m in methods}
    if cfg.method == "both":
        report["rows"] = [_paired_row(a, b) for a, b in
                          zip(scans["mc"].estimates, scans["quad"].estimates)]
        report["gaps"] = {m: s.gaps for m, s in scans.items()}
        report["direct_gaps"] = scans["quad"].direct_gaps
    else:
        only = scans[cfg.method]
        data = only.to_dict()
        report["rows"] = data["rows"]
        report["gaps"] = data["gaps"]
        if "direct_gaps" in data:
            report["direct_gaps"] = data["direct_gaps"]
    report["resolved"] = {m: s.resolved for m, s in scans.items()}
    report["monotone"] = all(s.monotone for s in scans.values())
    report["degenerate_resamples"] = sum(s.degenerate_resamples for s in scans.values())
    return report, (EXIT_OK if report["monotone"] else EXIT_NOT_MONOTONE)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, allow_nan=False) + "\n"
    rows = report["rows"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    columns = list(rows[0].keys())
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else repr(row[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    cfg = resolve_config(args)
    if cfg.subcommand == "sample":
        cloud = sample(cfg.spec, cfg.n[0], cfg.seed)
        if cfg.out:
            write_cloud_csv(cloud, cfg.out)
            print(f"seed: {cfg.seed}")
        else:
            buf = io.StringIO()
            write_cloud_csv(cloud, buf)
            sys.stdout.write(buf.getvalue())
            print(f"seed: {cfg.seed}", file=sys.stderr)
        return EXIT_OK
    if cfg.subcommand == "expect" or (cfg.subcommand == "sphere" and cfg.n_range is None):
        report, code = run_expect(cfg)
    else:
        report, code = run_scan(cfg)
    _emit(render(report, cfg.format), cfg.out)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (UsageError, DomainError) as exc:
        print(f"facetmono: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, QuantileRangeError, DegenerateSampleError) as exc:
        print(f"facetmono: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
