"""Command-line entry point.

Subcommands mirror the pipeline stages (ingest, balance, augment, evaluate,
report) plus run-all. Exit codes: 0 success, 1 usage or configuration
error, 2 data or integrity error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import ConfigError, DataError, IntegrityError
from .pipeline import run_all, run_stage

_STAGE_COMMANDS = ("ingest", "balance", "augment", "evaluate", "report")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are exit code 1, not 2
        raise ConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="cadpipe", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in _STAGE_COMMANDS + ("run-all",):
        cmd = sub.add_parser(name, help=f"run the {name} step")
        cmd.add_argument("--config", required=True, help="pipeline config file")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the configured seed")
        cmd.add_argument("--mode", choices=("paper-faithful", "leakage-safe"),
                         default=None, help="override the configured leakage mode")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("no command given; expected one of "
                              f"{_STAGE_COMMANDS + ('run-all',)}")
        cfg = load_config(args.config, seed_override=args.seed, mode_override=args.mode)
        if args.command == "run-all":
            manifest = run_all(cfg)
        else:
            manifest = run_stage(args.command, cfg)
        done = ", ".join(sorted(manifest.data["stages"]))
        print(f"ok: stages recorded [{done}] in {cfg.out_dir / 'manifest.json'}")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, IntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
