"""Main module."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv, find_dotenv

from cli.commands import COMMANDS, EXIT_CONFIG, EXIT_FAILED, EXIT_OK
from cli.config import dump_config, load_config
from libs.quadrature import QuadratureError, set_default_tolerances
from libs.utils import XlabError, setup_logging
from verify import SUITES

load_dotenv(find_dotenv())

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="YAML or JSON run configuration")
    common.add_argument("--out", type=str, default=None, help="Output file, stdout when missing")
    common.add_argument("--format", type=str, choices=["json", "csv"], default=None, help="Output format")
    common.add_argument("--seed", type=int, default=None, help="Seed of random families and random suites")
    common.add_argument("--tol-abs", type=float, default=None, help="Absolute quadrature tolerance")
    common.add_argument("--tol-rel", type=float, default=None, help="Relative quadrature tolerance")
    common.add_argument(
        "--dump-config",
        type=str,
        default=None,
        metavar="PATH",
        help="Write the effective configuration as JSON to PATH and exit",
    )
    common.add_argument("--verbose", action="store_true", help="Log INFO messages to the console")

    parser = argparse.ArgumentParser(
        prog="xlab",
        description="Rearrangements, Lorentz-type norms and Calderon-type operators on step functions.\n"
        "Exit status: 0 success, 1 failed verification, 2 usage or configuration error.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("check-phi", parents=[common], help="Check that phi is admissible")
    subparsers.add_parser("rearrange", parents=[common], help="Decreasing rearrangement f* and its average f**")
    subparsers.add_parser("norm", parents=[common], help="Rearrangement-invariant norm of a function literal")
    subparsers.add_parser("apply", parents=[common], help="Table of t, P f, Q f, R f")
    verify = subparsers.add_parser("verify", parents=[common], help="Run a verification suite")
    verify.add_argument("suite", choices=sorted(SUITES), help="Suite name")
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested config values given on the command line."""
    overrides: Dict[str, Any] = {"command": args.command}
    if getattr(args, "suite", None):
        overrides["suite"] = args.suite
    if args.seed is not None:
        overrides["family"] = {"seed": args.seed}
    tolerances = {k: v for k, v in (("abs", args.tol_abs), ("rel", args.tol_rel)) if v is not None}
    if tolerances:
        overrides["tolerances"] = tolerances
    output = {k: v for k, v in (("path", args.out), ("format", args.format)) if v is not None}
    if output:
        overrides["output"] = output
    return overrides


def write_output(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors and 0 on --help
        return e.code if isinstance(e.code, int) else EXIT_CONFIG

    setup_logging(console_level=logging.INFO if args.verbose else logging.ERROR)
    try:
        config = load_config(args.config, overrides_from(args))
        if args.dump_config:
            write_output(dump_config(config), args.dump_config)
            return EXIT_OK
        set_default_tolerances(config.tolerances.abs, config.tolerances.rel)
        status, text = COMMANDS[config.command](config)
    except QuadratureError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_FAILED
    except (XlabError, ValueError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.exception(e)
        return EXIT_FAILED
    write_output(text, config.output.path)
    return status


if __name__ == "__main__":
    sys.exit(main())
