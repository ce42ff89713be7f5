"""
Command-line front end for orbispec.

    python -m app spectrum --group pillow.json --p 1 --max-norm2 4
    python -m app compare --a pillow.json --b square.json --p 0 --max-norm2 1
    python -m app catalog --emit O2-d4 > o2.json

Group arguments take a JSON file path or 'catalog:NAME'. Results go to
stdout; logs and error reports go to stderr. Exit codes: 0 success,
2 invalid input or failed check, 1 internal error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError

from app.config import settings
from app.core.commands import command_runner
from app.core.exceptions import ConfigurationError, OrbispecException
from app.models.request import Command, OutputFormat, RunConfig
from app.services.logger import app_logger, setup_logger
from app.utils.serialization import dumps


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="Worker threads (default: THREADS or core count)")
    common.add_argument("--enum-cap", dest="enum_cap", type=int, default=None, help="Lattice enumeration vector cap")
    common.add_argument("--log-level", dest="log_level", default=None, help="Log level for stderr output")
    return common


def _build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="orbispec",
        description="Exact Hodge spectra, singular strata and heat invariants of flat orbifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_validate = sub.add_parser(Command.VALIDATE.value, parents=[common], help="Check a group file")
    p_validate.add_argument("file", help="Group file or catalog:NAME")

    p_spectrum = sub.add_parser(Command.SPECTRUM.value, parents=[common], help="Exact p-spectrum")
    p_spectrum.add_argument("--group", required=True)
    p_spectrum.add_argument("--p", type=int, required=True)
    p_spectrum.add_argument("--max-norm2", dest="max_norm2", required=True)
    p_spectrum.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)

    p_compare = sub.add_parser(Command.COMPARE.value, parents=[common], help="Compare two p-spectra")
    p_compare.add_argument("--a", dest="group", required=True)
    p_compare.add_argument("--b", dest="group_b", required=True)
    p_compare.add_argument("--p", type=int, required=True)
    p_compare.add_argument("--max-norm2", dest="max_norm2", required=True)

    p_strata = sub.add_parser(Command.STRATA.value, parents=[common], help="Singular strata")
    p_strata.add_argument("--group", required=True)

    p_heat = sub.add_parser(Command.HEAT.value, parents=[common], help="Heat expansion and invariants")
    p_heat.add_argument("--group", required=True)
    p_heat.add_argument("--p", type=int, required=True)

    p_trace = sub.add_parser(Command.TRACE_CHECK.value, parents=[common], help="Numerical heat-trace check")
    p_trace.add_argument("--group", required=True)
    p_trace.add_argument("--p", type=int, required=True)
    p_trace.add_argument("--t", type=float, action="append", default=[], help="Sample time (repeatable)")
    p_trace.add_argument("--max-norm2", dest="max_norm2", default=None)

    p_kraw = sub.add_parser(Command.KRAWTCHOUK.value, parents=[common], help="Binary Krawtchouk values")
    p_kraw.add_argument("--d", type=int, required=True)
    p_kraw.add_argument("--p", type=int, default=None)
    which = p_kraw.add_mutually_exclusive_group()
    which.add_argument("--k", type=int, default=None)
    which.add_argument("--zeros", action="store_true")

    p_catalog = sub.add_parser(Command.CATALOG.value, parents=[common], help="Built-in examples")
    action = p_catalog.add_mutually_exclusive_group(required=True)
    action.add_argument("--list", dest="catalog_list", action="store_true")
    action.add_argument("--emit", dest="catalog_emit", metavar="NAME")
    action.add_argument("--check", dest="catalog_check", metavar="NAME")

    return parser


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return _build_parser().parse_args(argv)


def _to_config(args: argparse.Namespace) -> RunConfig:
    values: Dict[str, Any] = {
        key: value for key, value in vars(args).items()
        if key != "log_level" and value is not None
    }
    if args.command == Command.VALIDATE.value:
        values["group"] = values.pop("file")
    return RunConfig.model_validate(values)


def _report(error: OrbispecException) -> int:
    sys.stderr.write(dumps({**error.to_report(), "exit_code": error.exit_code}) + "\n")
    return error.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    args = _parse_args(argv)
    if args.log_level:
        setup_logger(args.log_level)

    try:
        settings.validate()
        config = _to_config(args)
    except ConfigurationError as e:
        return _report(e)
    except PydanticValidationError as e:
        first = e.errors()[0]
        flag = "--" + "-".join(str(p) for p in first["loc"]).replace("_", "-")
        sys.stderr.write(dumps({
            "error": "ValidationError",
            "message": f"{flag}: {first['msg']}",
            "status_code": 400,
            "context": {},
            "exit_code": 2,
        }) + "\n")
        return 2

    try:
        document = command_runner.run(config)
    except OrbispecException as e:
        app_logger.debug(f"{config.command.value} failed: {type(e).__name__}")
        return _report(e)
    except Exception as e:
        app_logger.exception(f"Internal error in {config.command.value}: {e}")
        sys.stderr.write(dumps({
            "error": "InternalError",
            "message": str(e),
            "status_code": 500,
            "context": {},
            "exit_code": 1,
        }) + "\n")
        return 1

    if isinstance(document, str):
        sys.stdout.write(document)
    else:
        sys.stdout.write(dumps(document) + "\n")

    if config.command == Command.CATALOG and config.catalog_check and not document.get("passed"):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
