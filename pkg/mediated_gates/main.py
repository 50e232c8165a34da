"""
Command-line entry point: ``python -m mediated_gates <command> [flags]``.
"""
from __future__ import annotations

import argparse
import logging
import sys

from pydantic import ValidationError

from mediated_gates.commands import derive, replay, robustness, scaling, synth, table1, weyl, wodd
from mediated_gates.commands.common import global_flags
from mediated_gates.errors import (
    EXIT_NUMERICAL,
    EXIT_USAGE,
    CommandError,
    DimensionError,
    DomainError,
    LookupFailure,
    NotUnitaryError,
)

logger = logging.getLogger("mediated_gates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mediated_gates",
        description="Mediated gates for exchange-coupled spin qubits",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [global_flags()]
    for command in (derive, weyl, synth, table1, robustness, scaling, replay, wodd):
        command.register(subparsers, parents)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 after --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except CommandError as exc:
        logger.error(exc.detail)
        return exc.exit_code
    except NotUnitaryError as exc:
        logger.error("%s", exc)
        return EXIT_NUMERICAL
    except (LookupFailure, DomainError, DimensionError, ValidationError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
