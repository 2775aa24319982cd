import argparse
import logging
import sys
from enum import Enum
from typing import List, Optional

from dotenv import find_dotenv, load_dotenv
from pydantic import ValidationError

from scalecheck.commands.audit import audit_command
from scalecheck.commands.fit import fit_command
from scalecheck.commands.interpret import interpret_command
from scalecheck.core.scalecheck_config import scalecheck_config
from scalecheck.core.scalecheck_exceptions import (
    AuditError,
    ConvergenceError,
    ScaleCheckError,
    ScaleCheckInputError,
)
from scalecheck.schemas.report_schemas import RunConfig

load_dotenv(find_dotenv(".env"))

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_NOT_CONVERGED = 3


class Command(Enum):
    FIT = "fit"
    AUDIT = "audit"
    INTERPRET = "interpret"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scalecheck",
        description="Fit factor models under alternative latent scalings and audit equality constraints",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cov", type=str, required=True, help="Covariance matrix file (full or lower triangle)")
    common.add_argument("--n", type=int, required=True, help="Sample size")
    common.add_argument("--model", type=str, required=True, help="Model description file")
    common.add_argument("--constraints", type=str, required=False, help="Constraints file")
    common.add_argument(
        "--scaling",
        type=str,
        required=False,
        help="fixed-marker[:position|:X1,X3], fixed-factor or effects-coding",
    )
    common.add_argument(
        "--alpha", type=float, default=scalecheck_config.default_alpha, help="Significance level"
    )
    common.add_argument("--format", type=str, default="text", help="Output format: text or json")
    common.add_argument("--out", type=str, required=False, help="Write the report to this file")

    subparsers = parser.add_subparsers(
        title="Subcommands",
        dest="command",
        help="Display available subcommands",
    )

    fit_parser = subparsers.add_parser(
        Command.FIT.value, parents=[common], help="Fit the model under one scaling"
    )
    fit_parser.set_defaults(func=fit_command)

    audit_parser = subparsers.add_parser(
        Command.AUDIT.value, parents=[common], help="Test an equality constraint under every scaling"
    )
    audit_parser.set_defaults(func=audit_command)

    interpret_parser = subparsers.add_parser(
        Command.INTERPRET.value, parents=[common], help="Show what each estimate measures"
    )
    interpret_parser.set_defaults(func=interpret_command)

    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    try:
        return RunConfig(
            covariance_path=args.cov,
            n=args.n,
            model_path=args.model,
            constraints_path=args.constraints,
            scaling=args.scaling,
            alpha=args.alpha,
            output_format=args.format,
            output_path=args.out,
        )
    except ValidationError as e:
        raise ScaleCheckInputError(str(e)) from e


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and map failures to exit codes."""
    logging.basicConfig(
        level=getattr(logging, scalecheck_config.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)

    if not hasattr(args, "func"):
        print("Invalid command. Use '--help' for assistance.")
        return EXIT_INPUT_ERROR

    try:
        args.func(_run_config(args))
    except ScaleCheckInputError as e:
        print(f"Input error: {str(e)}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ConvergenceError as e:
        print(f"Estimation did not converge: {str(e)}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except AuditError as e:
        print(f"Audit failed: {str(e)}", file=sys.stderr)
        if isinstance(e.__cause__, ScaleCheckInputError):
            return EXIT_INPUT_ERROR
        if isinstance(e.__cause__, ConvergenceError):
            return EXIT_NOT_CONVERGED
        return EXIT_FAILURE
    except ScaleCheckError as e:
        logger.exception(f"Command {args.command} failed")
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    try:
        run()
    except Exception as e:
        print(f"Fatal error: {str(e)}", file=sys.stderr)
        sys.exit(EXIT_FAILURE)
