"""Command line: ``abcd {run, sweep, verify, besov, report}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import experiments as ex
from .integrator import ConfigInvalid
from .model import PRESETS

log = logging.getLogger("boussinesq_abcd")


def _config(args) -> ex.ExperimentConfig:
    if args.config:
        return ex.load_config(args.config, preset_override=args.preset)
    return ex.parse_config({}, preset_override=args.preset)


def cmd_run(args) -> int:
    cfg = _config(args)
    res = ex.run_to_dir(cfg, args.out)
    log.info("status=%s t_final=%.6g T_exist=%s Us0=%.6g", res.status.value, res.t_final, res.T_exist, res.Us0)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = ex.sweep_epsilon(cfg, args.out, jobs=args.jobs)
    for row in out["rows"]:
        log.info("eps=%-8g seed=%d T_exist=%-12.6g eps*T=%-10.6g censored=%s",
                 row["epsilon"], row["seed"], row["T_exist"], row["eps_T_exist"], row["censored"])
    sm = out["summary"]
    if sm["all_censored"]:
        log.info("all runs censored at t_end = K/eps")
    else:
        log.info("eps*T_exist over uncensored rows: min=%.6g max=%.6g ratio=%.4g",
                 sm["min_eps_T"], sm["max_eps_T"], sm["ratio"])
    return 0


def cmd_verify(args) -> int:
    reports = ex.verify(args.suite, args.out)
    for rep in reports:
        log.info("%-13s %s (%.2fs)", rep["suite"], "PASS" if rep["passed"] else "FAIL", rep["seconds"])
        for c in rep["checks"]:
            log.info("    %-36s %s  measured=%.3e  tol=%s%g", c["name"], "ok " if c["passed"] else "BAD",
                     c["measured"], c["op"], c["tolerance"])
    return 0 if all(r["passed"] for r in reports) else 1


def cmd_besov(args) -> int:
    norms = ex.besov(args.file, args.s, args.r)
    print(json.dumps(norms, indent=2))
    return 0


def cmd_report(args) -> int:
    path = ex.report(args.run_dir, args.out)
    log.info("wrote %s and %s", path, path.with_suffix(".html"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abcd", description="abcd Boussinesq simulator and diagnostics")
    parser.add_argument("--quiet", action="store_true", help="only print warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--preset", choices=sorted(PRESETS), help="override the parameter preset")
        p.add_argument("--out", type=Path, default=Path(out_default))
        p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("run", help="single simulation")
    common(p, "run_out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="epsilon-scaling sweep with t_end = K/eps")
    common(p, "sweep_out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="invariant suites")
    p.add_argument("suite", choices=list(ex.verification.SUITES) + ["all"])
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("besov", help="Besov norms of the fields in a snapshot")
    p.add_argument("file", type=Path)
    p.add_argument("s", type=float)
    p.add_argument("r", type=float, nargs="?", default=2.0, help="1..inf (default 2)")
    p.set_defaults(func=cmd_besov)

    p = sub.add_parser("report", help="CSV/HTML summary of a run directory")
    p.add_argument("run_dir", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigInvalid, ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
