"""
Command-line entry point: ``python app.py <subcommand> [flags]``.

Each subcommand runs one job from ``jobs/``; flags override a JSON config
file given with ``--config``. Exit codes: 0 success, 2 invalid input,
3 aborted run (budget, precision, insufficient data). Errors are printed
as JSON on stderr.
"""
import argparse
import json
import logging
import sys

import config
from errors import ConfigError, FlagPointsError
from jobs import (
    beta_records,
    count_points,
    enumerate_points,
    escape_traces,
    genericity_report,
    window_ratios,
    zoom_clouds,
)

log = logging.getLogger(__name__)

JOBS = {
    "enumerate": enumerate_points,
    "count": count_points,
    "windows": window_ratios,
    "zoom": zoom_clouds,
    "beta": beta_records,
    "genericity": genericity_report,
    "escape": escape_traces,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ======================================================
#               FLAGS
# ======================================================

def _fit_flag(value: str):
    key, _, number = value.partition("=")
    if key != "b" or not number:
        raise ConfigError(f"--fit expects b=<int>, got '{value}'")
    try:
        return int(number)
    except ValueError:
        raise ConfigError(f"--fit expects b=<int>, got '{value}'")


def _box_flag(value: str):
    """``lo,hi;lo,hi`` → [[lo, hi], ...]."""
    try:
        return [[float(x) for x in axis.split(",")] for axis in value.split(";") if axis.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse box '{value}'")


def _window_flag(value: str):
    """``cap`` or ``box:<lo,..>:<hi,..>:<u,..>``."""
    parts = value.split(":")
    if parts == ["cap"]:
        return {"kind": "cap"}
    if parts[0] == "box" and len(parts) == 4:
        try:
            lo, hi, u = ([float(x) for x in p.split(",")] for p in parts[1:])
        except ValueError:
            raise ConfigError(f"cannot parse window '{value}'")
        return {"kind": "box", "d0_lo": lo, "d0_hi": hi, "u": u}
    raise ConfigError(f"cannot parse window '{value}'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flagpoints", description="Rational points of bounded height on flag varieties.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in JOBS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--variety", help="gr:l:d | quadric:n | flag3")
        p.add_argument("--hmax", type=float, nargs="+")
        p.add_argument("--grid", help="heights: a,b,c or start:stop:step")
        p.add_argument("--t-grid", dest="t_grid", help="times: a,b,c or start:stop:step")
        p.add_argument("--tau", dest="taus", type=float, nargs="+")
        p.add_argument("--window", type=_window_flag)
        p.add_argument("--box", type=_box_flag)
        p.add_argument("--center", dest="centers", action="append")
        p.add_argument("--bound", type=float)
        p.add_argument("--h-min", dest="h_min", type=float)
        p.add_argument("--fit", dest="fit_b", type=_fit_flag)
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--include-self", dest="exclude_self", action="store_const", const=False)
        p.add_argument("--workers", type=int)
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--log-level", dest="log_level", default=config.LOG_LEVEL)
    return parser


# ======================================================
#               RUN
# ======================================================

def run(subcommand: str, cfg: config.ExperimentConfig) -> dict:
    if subcommand not in JOBS:
        raise ConfigError(f"unknown subcommand '{subcommand}'", subcommand=subcommand)
    log.info(f"🔄 {subcommand} on {cfg.variety}")
    return JOBS[subcommand].run(cfg)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config.setup_logging(args.log_level)
        overrides = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config", "log_level")}
        cfg = config.ExperimentConfig.load(args.config, overrides)
        result = run(args.subcommand, cfg)
    except FlagPointsError as e:
        log.error(f"❌ {e}")
        print(json.dumps(e.to_dict(), sort_keys=True, default=str), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        log.exception(f"❌ Unexpected failure: {e}")
        print(json.dumps({"error": "internal", "message": str(e)}, sort_keys=True), file=sys.stderr)
        return 3

    print(json.dumps(result, sort_keys=True, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
