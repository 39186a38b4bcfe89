"""Command-line front end.

Exit codes: 0 ok, 1 a check failed, 2 usage or cap error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .anticoncentration import MODES, scan_to_csv, scan_to_json, transition_scan
from .combinatorics import DEFAULT_MATCHING_CAP, double_factorial
from .errors import CapExceededError
from .gbs import (
    GbsConfig,
    expected_photons,
    sbs_collision_probability,
    sector_probability,
    sector_sum_deviation,
)
from .moments_exact import (
    FIRST_MOMENT_CAP,
    SECOND_MOMENT_CAP,
    SECOND_MOMENT_LONG_CAP,
    enumerate_second_moment,
    first_moment_closed,
    first_moment_poly,
    leading_coefficient,
)
from .moments_mc import DEFAULT_BATCHES, estimate_moment
from .verify import LEVELS, render, run_checks

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
JOBS_ENV = "HAFMOMENTS_JOBS"


class CommandResult:
    def __init__(self, text: str, *, code: int = EXIT_OK, seeds=None, caps=None, checks=None):
        self.text = text
        self.code = code
        self.seeds = seeds or {}
        self.caps = caps or {}
        self.checks = checks


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()] if text.strip() else []


def write_manifest(path: Path, argv: Sequence[str], result: CommandResult, duration: float, output: Path | None):
    manifest = {
        "command": ["hafmoments", *argv],
        "version": __version__,
        "seeds": result.seeds,
        "caps": result.caps,
        "duration_seconds": round(duration, 3),
        "output": None if output is None else str(output),
        "output_sha256": hashlib.sha256(result.text.encode()).hexdigest(),
        "exit_code": result.code,
    }
    if result.checks is not None:
        manifest["checks"] = result.checks
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


# -- commands ---------------------------------------------------------------


def cmd_m1(args) -> CommandResult:
    if args.mode == "closed":
        value = first_moment_closed(args.k, args.n)
    else:
        value = double_factorial(2 * args.n - 1) * first_moment_poly(args.n)(args.k)
    if args.json:
        text = json.dumps({"k": args.k, "n": args.n, "mode": args.mode, "m1": str(value)})
    else:
        text = str(value)
    return CommandResult(text + "\n", caps={"first_moment_enumeration": FIRST_MOMENT_CAP})


def cmd_m2poly(args) -> CommandResult:
    def progress(done, total):
        print(f"  chunk {done}/{total}", file=sys.stderr)

    report = enumerate_second_moment(
        args.n, jobs=args.jobs, allow_long=args.allow_n4, progress=progress if args.n >= 4 else None
    )
    poly = report.poly
    n = args.n
    expected_sum = 4**n * double_factorial(2 * n - 1) ** 3
    checks = {
        "graphs": str(report.graphs),
        "sum_coeffs": str(poly.total()),
        "expected_sum_coeffs": str(expected_sum),
        "c_2n": str(poly.coefficient(2 * n)),
        "expected_c_2n": str(leading_coefficient(n)),
        "odd_components": report.odd_components,
    }
    ok = (
        poly.total() == expected_sum
        and poly.coefficient(2 * n) == leading_coefficient(n)
        and report.odd_components == 0
    )
    checks["ok"] = ok
    caps = {"second_moment": SECOND_MOMENT_LONG_CAP if args.allow_n4 else SECOND_MOMENT_CAP}
    return CommandResult(poly.to_json() + "\n", code=EXIT_OK if ok else EXIT_CHECK, caps=caps, checks=checks)


def cmd_mc(args) -> CommandResult:
    est = estimate_moment(
        args.t, args.k, args.n, args.samples, args.batches, args.seed, jobs=args.jobs, estimator=args.estimator
    )
    return CommandResult(est.to_json() + "\n", seeds={"mc": args.seed}, caps={"hafnian": DEFAULT_MATCHING_CAP})


def cmd_scan(args) -> CommandResult:
    kwargs = {"jobs": args.jobs}
    if args.mode == "monte-carlo":
        kwargs.update(samples=args.samples, batches=args.batches, seed=args.seed)
    reports = transition_scan(_int_list(args.n_list), _int_list(args.k_list), args.mode, **kwargs)
    fmt = args.format
    if fmt is None:
        fmt = "json" if args.out is not None and args.out.suffix == ".json" else "csv"
    text = scan_to_csv(reports) if fmt == "csv" else scan_to_json(reports, indent=2) + "\n"
    seeds = {"mc": args.seed} if args.mode == "monte-carlo" else {}
    return CommandResult(text, seeds=seeds, caps={"second_moment": SECOND_MOMENT_CAP})


def cmd_gbs(args) -> CommandResult:
    if args.gbs_command == "sector-sum":
        if args.photons % 2:
            raise ValueError(f"photon count {args.photons} is odd")
        config = GbsConfig(args.m, args.k, args.r)
        devs = sector_sum_deviation(config, args.photons // 2, args.trials, args.seed)
        worst = max(devs) if devs else 0.0
        code = EXIT_OK if worst < args.tol else EXIT_CHECK
        return CommandResult(f"{worst!r}\n", code=code, seeds={"haar": args.seed})
    if args.gbs_command == "p2n":
        if args.photons % 2:
            raise ValueError(f"photon count {args.photons} is odd")
        config = GbsConfig(args.m or args.k, args.k, args.r)
        return CommandResult(f"{sector_probability(config, args.photons // 2)!r}\n")
    if args.gbs_command == "sbs-collision":
        return CommandResult(f"{sbs_collision_probability(args.n, args.k)!r}\n")
    if args.gbs_command == "expected-photons":
        est = expected_photons(GbsConfig(args.m, args.k, args.r))
        return CommandResult(json.dumps({"mean": est.mean, "collision_free": est.collision_free}) + "\n")
    raise ValueError(f"unknown gbs subcommand {args.gbs_command!r}")


def cmd_verify(args) -> CommandResult:
    results = run_checks(args.level, jobs=args.jobs)
    code = EXIT_OK if all(r.passed for r in results) else EXIT_CHECK
    checks = {r.name: r.passed for r in results}
    return CommandResult(render(results, args.level), code=code, checks=checks)


def cmd_reproduce(args) -> CommandResult:
    manifest = json.loads(args.manifest_file.read_text(encoding="utf-8"))
    argv = list(manifest["command"][1:])
    with tempfile.TemporaryDirectory() as tmp:
        suffix = Path(manifest["output"]).suffix if manifest.get("output") else ""
        out = Path(tmp) / f"output{suffix}"
        argv = _strip_output_flags(argv) + ["--out", str(out)]
        run(argv)
        digest = hashlib.sha256(out.read_bytes()).hexdigest()
    same = digest == manifest["output_sha256"]
    text = f"{'reproduced' if same else 'MISMATCH'} {digest}\n"
    return CommandResult(text, code=EXIT_OK if same else EXIT_CHECK)


def _strip_output_flags(argv: list[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in ("--out", "--manifest"):
            skip = True
            continue
        if tok.startswith("--out=") or tok.startswith("--manifest="):
            continue
        out.append(tok)
    return out


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="write output here (a .manifest.json is written alongside)")
    common.add_argument("--manifest", type=Path, help="write the run manifest here")
    common.add_argument("--jobs", type=int, default=_default_jobs(), help=f"worker threads (default ${JOBS_ENV} or 1)")

    parser = argparse.ArgumentParser(prog="hafmoments", description="Moments of squared hafnians for Gaussian Boson Sampling.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("m1", parents=[common], help="exact first moment M1(k, n)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("closed", "enumerate"), default="closed")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_m1)

    p = sub.add_parser("m2poly", parents=[common], help="second-moment coefficients c_i by enumeration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--allow-n4", action="store_true", help="permit the n=4 long run (~3e8 graphs)")
    p.set_defaults(func=cmd_m2poly)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo estimate of M_t(k, n)")
    p.add_argument("--t", type=int, choices=(1, 2), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--batches", type=int, default=DEFAULT_BATCHES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=("mean", "median-of-means"), default="mean")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("scan", parents=[common], help="tabulate m2(k, n)")
    p.add_argument("--n-list", required=True, help="comma-separated n values")
    p.add_argument("--k-list", required=True, help="comma-separated k values")
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--batches", type=int, default=DEFAULT_BATCHES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("gbs", help="physical GBS quantities")
    gsub = p.add_subparsers(dest="gbs_command", required=True)
    g = gsub.add_parser("sector-sum", parents=[common], help="max |sum P_U - P(2n)| over Haar unitaries")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--r", type=float, required=True)
    g.add_argument("--photons", type=int, required=True, help="total photon count 2n")
    g.add_argument("--trials", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=1e-9)
    g = gsub.add_parser("p2n", parents=[common], help="probability of 2n photons in total")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--r", type=float, required=True)
    g.add_argument("--photons", type=int, required=True)
    g.add_argument("--m", type=int, default=None)
    g = gsub.add_parser("sbs-collision", parents=[common], help="Scattershot input collision probability")
    g.add_argument("--n", type=float, required=True)
    g.add_argument("--k", type=int, required=True)
    g = gsub.add_parser("expected-photons", parents=[common], help="k sinh^2 r and a collision-free hint")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--r", type=float, required=True)
    p.set_defaults(func=cmd_gbs)

    p = sub.add_parser("verify", parents=[common], help="run the cross-oracle self-checks")
    p.add_argument("--level", choices=LEVELS, default="quick")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", help="re-run a manifest and compare output checksums")
    p.add_argument("manifest_file", type=Path)
    p.set_defaults(func=cmd_reproduce, out=None, manifest=None)
    return parser


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        result: CommandResult = args.func(args)
    except CapExceededError as exc:
        print(f"hafmoments: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"hafmoments: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    duration = time.perf_counter() - start
    out: Path | None = getattr(args, "out", None)
    if out is not None:
        try:
            out.write_text(result.text, encoding="utf-8")
        except OSError as exc:
            print(f"hafmoments: cannot write {out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        write_manifest(out.with_name(out.name + ".manifest.json"), argv, result, duration, out)
    else:
        sys.stdout.write(result.text)
    if getattr(args, "manifest", None) is not None:
        write_manifest(args.manifest, argv, result, duration, out)
    return result.code


def main(argv: Sequence[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    raise SystemExit(main())
