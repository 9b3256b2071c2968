"""Command-line front end.

Subcommands write plot-ready CSV next to a JSON manifest; see ``--help`` of
each.  Exit codes: 0 success, 1 failed verification or manifest check,
2 usage error, 3 resource or budget limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .lattice import MODELS, BudgetExceeded, ModelParams
from .manifest import OUTPUT_DIR_ENV, ManifestMismatch, check_outputs, default_output_dir, dump_json, load_manifest, write_outputs
from .runs import (
    TAILGRID_COLUMNS,
    exact_config,
    exact_files,
    replay,
    simulate_config,
    simulate_files,
    tailgrid_config,
    tailgrid_files,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_ALPHAS = "0,0.25,0.5,1,2,4,8,16,32,64,128,256"


class UsageError(ValueError):
    pass


def _alphas(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("alphas must be a non-empty list of non-negative numbers")
    return vals


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _run_flags(sp: argparse.ArgumentParser, trials: bool = True) -> None:
    sp.add_argument("--model", choices=MODELS, required=True)
    sp.add_argument("--n", type=int, required=True, help="cylinder width (even)")
    sp.add_argument("--p", type=float, required=True, help="mirror probability per site")
    if trials:
        sp.add_argument("--trials", type=_positive, required=True)
        sp.add_argument("--seed", type=int, required=True, help="master seed (unsigned 64-bit)")
        sp.add_argument("--cap", type=_positive, default=None, help="street cap per trial (default scales with p^-2)")
        sp.add_argument("--C", type=float, default=None, dest="C", help="density constant (default n*p)")
        sp.add_argument("--enforce-regime", action="store_true", help="refuse p > C/n")
    sp.add_argument("--conditioned", action="store_true", help="use the at-most-two-mirror street law")


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--out", type=Path, default=None,
                    help=f"output directory (default ${OUTPUT_DIR_ENV} or ./mirrorcyl-out)")
    sp.add_argument("--threads", type=_positive, default=os.cpu_count() or 1,
                    help="worker threads; outputs do not depend on this")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mirrorcyl", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"mirrorcyl {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="Monte Carlo hitting times; writes trials.csv and aggregate.json")
    _run_flags(sp)
    sp.add_argument("--first-direction", choices=("E", "W"), default="E")
    sp.add_argument("--count-loops", action="store_true")
    _common(sp)

    sp = sub.add_parser("exact", help="exact hitting-time CDF for small widths; writes cdf.csv")
    _run_flags(sp, trials=False)
    sp.add_argument("--i-max", type=_positive, default=200)
    sp.add_argument("--first-direction", choices=("E", "W"), default="E")
    sp.add_argument("--max-width", type=int, default=6)
    sp.add_argument("--budget", type=_positive, default=3**8, help="largest number of street configurations")
    _common(sp)

    sp = sub.add_parser("tailgrid", help="empirical tails at alpha p^-2 against the bound curves")
    _run_flags(sp)
    sp.add_argument("--alphas", type=_alphas, default=_alphas(DEFAULT_ALPHAS))
    sp.add_argument("--confidence", type=float, default=0.99, help="two-sided Wilson confidence")
    _common(sp)
    sp.epilog = "columns: " + ", ".join(TAILGRID_COLUMNS)

    sp = sub.add_parser("verify", help="run the acceptance checks; exit 1 on any failure")
    sp.add_argument("--only", action="append", default=None, metavar="CHECK",
                    help="run only this check (repeatable); one of " + ", ".join(_check_names()))
    sp.add_argument("--profile", choices=("full", "quick"), default="full")
    sp.add_argument("--seed", type=int, default=20240601)
    sp.add_argument("--inject-fault", choices=("g",), default=None,
                    help="perturb the bar-increment probability to exercise the harness")
    _common(sp)

    sp = sub.add_parser("replay", help="re-run a manifest and write fresh outputs")
    sp.add_argument("manifest", type=Path)
    _common(sp)

    sp = sub.add_parser("check", help="confirm that the files in a directory match its manifest")
    sp.add_argument("directory", type=Path)
    return ap


def _check_names() -> list[str]:
    from .verification import CHECKS
    return list(CHECKS)


def _out_dir(args) -> Path:
    return args.out if args.out is not None else default_output_dir()


def _regime(args) -> None:
    if not args.enforce_regime:
        return
    if args.C is None:
        raise UsageError("--enforce-regime needs --C")
    if not ModelParams(args.n, args.p, args.C).in_regime():
        raise UsageError(f"p = {args.p} violates p <= C/n = {args.C / args.n}")


def _validate(args) -> None:
    if args.n < 2 or args.n % 2:
        raise UsageError(f"n must be an even integer >= 2, got {args.n}")
    if not 0 <= args.p <= 1:
        raise UsageError(f"p must lie in [0, 1], got {args.p}")
    if getattr(args, "seed", 0) < 0 or getattr(args, "seed", 0) >= 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")


def _finish(out_dir: Path, files: dict, manifest) -> int:
    path = write_outputs(out_dir, manifest, files)
    for name in files:
        print(out_dir / name)
    print(path)
    return EXIT_OK


def cmd_simulate(args) -> int:
    _validate(args)
    _regime(args)
    cfg = simulate_config(args.model, args.n, args.p, args.trials, args.seed, args.conditioned, args.cap,
                          args.C, args.first_direction, args.count_loops)
    files, manifest, result = simulate_files(cfg, args.threads)
    if result.censor_count:
        print(f"warning: {result.censor_count} of {result.trials} trials censored at {cfg['street_cap']} streets",
              file=sys.stderr)
    return _finish(_out_dir(args), files, manifest)


def cmd_exact(args) -> int:
    _validate(args)
    cfg = exact_config(args.model, args.n, args.p, args.i_max, args.conditioned, args.first_direction,
                       args.max_width, args.budget)
    files, manifest, _ = exact_files(cfg, args.threads)
    return _finish(_out_dir(args), files, manifest)


def cmd_tailgrid(args) -> int:
    _validate(args)
    _regime(args)
    if args.p <= 0:
        raise UsageError("tailgrid needs p > 0")
    if not 0 < args.confidence < 1:
        raise UsageError("--confidence must lie in (0, 1)")
    cfg = tailgrid_config(args.model, args.n, args.p, args.trials, args.seed, args.alphas, args.conditioned,
                          args.cap, args.C, args.confidence)
    files, manifest, _ = tailgrid_files(cfg, args.threads)
    return _finish(_out_dir(args), files, manifest)


def cmd_verify(args) -> int:
    from .verification import CHECK_ALIASES, CHECKS, report, run_checks

    if args.only:
        bad = [n for n in args.only if n not in CHECKS and n not in CHECK_ALIASES]
        if bad:
            raise UsageError(f"unknown check(s): {', '.join(bad)}; choose from {', '.join(CHECKS)}")
    results = run_checks(args.only, args.profile, args.seed, args.threads, args.inject_fault,
                         progress=lambda r: print(r.summary(), flush=True))
    rep = report(results, args.profile, args.seed, args.inject_fault)
    out_dir = _out_dir(args)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.json"
    path.write_bytes(dump_json(rep))
    print(path)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_replay(args) -> int:
    manifest = load_manifest(args.manifest)
    files, fresh, _ = replay(manifest, args.threads)
    if fresh.manifest_hash != manifest.manifest_hash:
        raise ManifestMismatch("replayed configuration hashes differently")
    return _finish(_out_dir(args), files, fresh)


def cmd_check(args) -> int:
    manifest = check_outputs(args.directory)
    print(f"ok {manifest.manifest_hash} {', '.join(sorted(manifest.outputs))}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "tailgrid": cmd_tailgrid,
    "verify": cmd_verify,
    "replay": cmd_replay,
    "check": cmd_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ManifestMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
