"""Command-line interface.

    sim <experiment> [--config FILE] [--set key=value ...]
                     [--out PATH] [--format csv|json] [--seed N]

Exit codes: 0 success, 1 configuration error, 2 runtime/physics error.
Errors are emitted as one JSON object on stderr. Log verbosity comes
from the TRIPLETSIM_LOG environment variable (debug, info, warning).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ._version import __version__
from .config import EXPERIMENTS, apply_overrides, load_config_file, parse_config
from .errors import ConfigError, SimulationError
from .runner import run_experiment
from .trace import emit, write_atomic

log = logging.getLogger("tripletsim")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Simulate and fit optically addressed triplet spin-qubit experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", metavar="experiment")
    for name, description in EXPERIMENTS.items():
        p = sub.add_parser(name, help=description, description=description)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            dest="overrides",
            help="override a config entry by dotted path (value parsed as JSON)",
        )
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
        p.add_argument("--seed", type=int, help="random seed for stochastic modes")
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("TRIPLETSIM_LOG", "warning").lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO, "warning": logging.WARNING}.get(
        level_name, logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _report_error(kind: str, exc: Exception) -> None:
    doc = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.experiment is None:
        parser.print_help()
        return 1
    try:
        raw = load_config_file(args.config) if args.config else {}
        raw = apply_overrides(raw, args.overrides)
        cfg = parse_config(
            raw,
            experiment=args.experiment,
            seed=args.seed,
            out=args.out,
            fmt=args.format,
        )
        log.info("running %s (seed %d)", cfg.experiment, cfg.seed)
        record = run_experiment(cfg)
        payload = emit(record, cfg.format)
        if cfg.out:
            write_atomic(cfg.out, payload)
            log.info("wrote %d bytes to %s", len(payload), cfg.out)
        else:
            sys.stdout.buffer.write(payload)
            sys.stdout.buffer.flush()
    except ConfigError as exc:
        _report_error("config", exc)
        return 1
    except SimulationError as exc:
        _report_error("runtime", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
