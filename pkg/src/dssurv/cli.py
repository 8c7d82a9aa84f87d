"""Command line front end.

Exit codes: 0 success, 2 parse/config error, 3 numeric-domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .data import build_cumulative_matrix
from .errors import ConfigError, DomainError, InvalidInputError, ParseError
from .inference import MassAssertion, cdf_envelope, evidence_exact, evidence_mc, interval_counts
from .km import kaplan_meier
from .trials import parse_trial_csv, simulate_trial, write_trial_csv
from .ve import Direction, VEAssertion, capped_interval_counts, sensitivity_sweep

log = logging.getLogger("dssurv")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3

DEFAULT_DRAWS = 100_000
DEFAULT_SEED = 0


def _versions() -> dict:
    return {"dssurv": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _one_sample(args):
    table = parse_trial_csv(args.input)
    if table.arms is not None and args.arm is None and len(table.arm_labels) > 1:
        raise ConfigError(f"input has arms {table.arm_labels}; choose one with --arm")
    return table.dataset(args.arm)


def _two_arms(args):
    if not args.arm_vaccine or not args.arm_placebo:
        raise ConfigError("two-arm commands need --arm-vaccine and --arm-placebo")
    if args.arm_vaccine == args.arm_placebo:
        raise ConfigError("--arm-vaccine and --arm-placebo must differ")
    table = parse_trial_csv(args.input)
    if table.arms is None:
        raise ConfigError("two-arm commands need an 'arm' column in the input")
    arm_v = build_cumulative_matrix(table.dataset(args.arm_vaccine))
    arm_p = build_cumulative_matrix(table.dataset(args.arm_placebo))
    return arm_v, arm_p


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join(missing)}")


def _format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(h) for h in header]] + [[f"{v:.6g}" if isinstance(v, float) else str(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) + "\n" for row in cells)


def _format_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _max_in_se(diff, se) -> Optional[float]:
    """Largest discrepancy in standard-error units; None when a zero-SE component disagrees."""
    worst = 0.0
    for d, s in zip(diff, se):
        if s > 0:
            worst = max(worst, d / s)
        elif d > 1e-9:
            return None
    return worst


def cmd_assert_cdf(args) -> str:
    _require(args, "tl", "tu")
    C = build_cumulative_matrix(_one_sample(args))
    assertion = MassAssertion(args.tl, args.tu, args.ql, args.qu)
    counts = interval_counts(C, assertion.t_l, assertion.t_u)
    exact = evidence_exact(counts, assertion.q_l, assertion.q_u)
    mc = evidence_mc(C, assertion, args.draws, args.seed, workers=args.workers)
    diff = [abs(a - b) for a, b in zip(exact.as_tuple(), mc.as_tuple())]
    report = {
        "command": "assert-cdf",
        "config": {
            "input": str(args.input),
            "arm": args.arm,
            "t_l": assertion.t_l,
            "t_u": assertion.t_u,
            "q_l": assertion.q_l,
            "q_u": assertion.q_u,
            "draws": args.draws,
            "seed": args.seed,
        },
        "m": C.m,
        "counts": counts.to_dict(),
        "evidence": exact.to_dict(),
        "evidence_mc": mc.to_dict(),
        "discrepancy": {
            "p": diff[0],
            "q": diff[1],
            "r": diff[2],
            "max_in_se": _max_in_se(diff, mc.se),
        },
        "versions": _versions(),
    }
    if args.format == "json":
        return _dumps(report)
    rows = [("exact", exact.p, exact.q, exact.r, ""), ("monte_carlo", mc.p, mc.q, mc.r, mc.mc_se)]
    header = ("path", "p", "q", "r", "mc_se")
    return (_format_csv if args.format == "csv" else _format_table)(header, rows)


def _ve_assertion(args) -> VEAssertion:
    _require(args, "tl", "tu", "theta")
    return VEAssertion(args.tl, args.tu, args.theta, Direction(args.direction))


def _ve_config(args, assertion, phis) -> dict:
    return {
        "input": str(args.input),
        "arm_vaccine": args.arm_vaccine,
        "arm_placebo": args.arm_placebo,
        **assertion.to_dict(),
        "phi": phis,
        "draws": args.draws,
        "seed": args.seed,
    }


def _arm_counts(arm_v, arm_p, assertion, phi) -> dict:
    return {
        "vaccine": {"m": arm_v.m, **capped_interval_counts(arm_v, assertion.t_l, assertion.t_u, phi).to_dict()},
        "placebo": {"m": arm_p.m, **capped_interval_counts(arm_p, assertion.t_l, assertion.t_u, phi).to_dict()},
    }


def cmd_assert_ve(args) -> str:
    assertion = _ve_assertion(args)
    phis = args.phi or [1.0]
    if len(phis) != 1:
        raise ConfigError("assert-ve takes a single --phi; use 'sweep' for several")
    phi = phis[0]
    arm_v, arm_p = _two_arms(args)
    report_rows = sensitivity_sweep(arm_v, arm_p, assertion, [phi], args.draws, args.seed, args.workers)
    ev = report_rows.rows[0][1]
    report = {
        "command": "assert-ve",
        "config": _ve_config(args, assertion, phi),
        "counts": _arm_counts(arm_v, arm_p, assertion, phi),
        "evidence": ev.to_dict(),
        "versions": _versions(),
    }
    if args.format == "json":
        return _dumps(report)
    header = ("phi", "p", "q", "r", "mc_se")
    return (_format_csv if args.format == "csv" else _format_table)(header, [(phi, ev.p, ev.q, ev.r, ev.mc_se)])


def cmd_sweep(args) -> str:
    assertion = _ve_assertion(args)
    phis = args.phi or [0.0, 0.25, 0.5, 0.75, 1.0]
    arm_v, arm_p = _two_arms(args)
    sweep = sensitivity_sweep(arm_v, arm_p, assertion, phis, args.draws, args.seed, args.workers)
    if args.format == "json":
        report = {
            "command": "sweep",
            "config": _ve_config(args, assertion, sweep.phis),
            "counts": {str(phi): _arm_counts(arm_v, arm_p, assertion, phi) for phi in sweep.phis},
            "rows": sweep.to_rows(),
            "versions": _versions(),
        }
        return _dumps(report)
    header = ("phi", "p", "q", "r", "mc_se")
    rows = [(phi, ev.p, ev.q, ev.r, ev.mc_se) for phi, ev in sweep.rows]
    return (_format_csv if args.format == "csv" else _format_table)(header, rows)


def _parse_grid(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--grid must be a comma-separated list of times, got {text!r}") from None


def cmd_envelope(args) -> str:
    dataset = _one_sample(args)
    C = build_cumulative_matrix(dataset)
    grid = _parse_grid(args.grid)
    if grid is None:
        grid = C.times.tolist()
    points = cdf_envelope(C, grid, args.level)
    header = ["t", "min_count", "max_count", "lower", "upper"]
    rows = [[p.t, p.min_count, p.max_count, p.lower, p.upper] for p in points]
    if args.km:
        curve = kaplan_meier(dataset)
        header.append("km_cdf")
        for row, p in zip(rows, points):
            row.append(float(1.0 - curve(p.t)))
    if args.format == "json":
        report = {
            "command": "envelope",
            "config": {"input": str(args.input), "arm": args.arm, "grid": grid, "level": args.level, "km": args.km},
            "m": C.m,
            "rows": [dict(zip(header, r)) for r in rows],
            "versions": _versions(),
        }
        return _dumps(report)
    return (_format_csv if args.format == "csv" else _format_table)(header, rows)


def cmd_simulate(args) -> str:
    arms = args.arms.split(",") if args.arms else None
    table = simulate_trial(
        m=args.m,
        rates=args.hazard,
        breaks=args.breaks or [],
        censor_rate=args.censor_rate,
        followup=args.followup,
        seed=args.seed,
        arms=arms,
        hazard_ratio=args.hazard_ratio,
    )
    buf = io.StringIO()
    write_trial_csv(table, buf)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dssurv",
        description="Nonparametric Dempster-Shafer evidence for right-censored survival data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="trial CSV with time,event[,arm]")
    # default resolved per command: parent actions are shared, so set_defaults would leak
    common.add_argument("--format", choices=("json", "csv", "table"), help="default json (csv for envelope)")
    common.add_argument("--output", help="write the report here instead of stdout")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--draws", type=int, default=DEFAULT_DRAWS)
    mc.add_argument("--seed", type=int, default=DEFAULT_SEED)
    mc.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo chunks (results do not depend on it)")

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--tl", type=float, help="window start (exclusive)")
    window.add_argument("--tu", type=float, help="window end (inclusive)")

    two_arm = argparse.ArgumentParser(add_help=False)
    two_arm.add_argument("--theta", type=float, help="VE threshold")
    two_arm.add_argument("--direction", choices=("gt", "lt"), default="gt")
    two_arm.add_argument("--phi", type=float, action="append", help="LTF cap in [0,1]; repeatable")
    two_arm.add_argument("--arm-vaccine")
    two_arm.add_argument("--arm-placebo")

    p = sub.add_parser("assert-cdf", parents=[common, mc, window], help="evidence about the failure fraction in a window")
    p.add_argument("--ql", type=float, default=0.0)
    p.add_argument("--qu", type=float, default=1.0)
    p.add_argument("--arm", help="arm label when the input has several")
    p.set_defaults(func=cmd_assert_cdf)

    p = sub.add_parser("assert-ve", parents=[common, mc, window, two_arm], help="evidence about vaccine efficacy")
    p.set_defaults(func=cmd_assert_ve)

    p = sub.add_parser("sweep", parents=[common, mc, window, two_arm], help="VE evidence across LTF caps")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("envelope", parents=[common], help="CDF evidence envelope (plot data)")
    p.add_argument("--grid", help="comma-separated times (default: observed times)")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--km", action="store_true", help="append the Kaplan-Meier CDF")
    p.add_argument("--arm", help="arm label when the input has several")
    p.set_defaults(func=cmd_envelope, default_format="csv")

    p = sub.add_parser("simulate", help="write a synthetic trial CSV")
    p.add_argument("--m", type=int, required=True, help="subjects per arm")
    p.add_argument("--hazard", type=float, nargs="+", required=True, help="piecewise-constant hazard rates")
    p.add_argument("--breaks", type=float, nargs="*", help="times where the hazard changes")
    p.add_argument("--censor-rate", type=float, default=0.0)
    p.add_argument("--followup", type=float, help="administrative censoring time")
    p.add_argument("--arms", help="two comma-separated labels, vaccine arm first")
    p.add_argument("--hazard-ratio", type=float, default=1.0, help="vaccine/placebo hazard ratio")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "draws", 1) < 1:
        log.error("--draws must be at least 1")
        return EXIT_CONFIG
    if getattr(args, "format", "json") is None:
        args.format = getattr(args, "default_format", "json")
    try:
        text = args.func(args)
    except (ParseError, ConfigError, InvalidInputError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (DomainError, ArithmeticError) as exc:
        log.error("%s", exc)
        return EXIT_DOMAIN
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
