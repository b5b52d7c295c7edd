"""
Command-line front end.

    verify --suite <name> [--m N] [--k N] [--pair a,b] [--theta R] [--samples N]
           [--seed U64] [--fd-step R] [--tol name=R ...] [--output PATH]
           [--format tree|table] [--workers N] [--config FILE] [--timing] [--verbose]
    dump-clifford --m N --k N --output PATH

Exit codes: 0 all checks pass, 1 a check failed, 2 usage/config error,
3 numerical-integrity error.
"""
import argparse
import logging
import sys

from dotenv import load_dotenv

from clifford import build_clifford_system, dump_clifford_system
from config import ALL, FORMATS, SUITES, load_config
from errors import ConfigError, DomainError, IsoparametricError, NumericalIntegrityError
from report import __version__
from verify_graph import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PASSED, run_suite

logger = logging.getLogger(__name__)


# ============================================================
# ARGUMENTS
# ============================================================
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isofkm", description="Numerical verification of OT-FKM isoparametric geometry.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="run a verification suite")
    verify.add_argument("--suite", choices=SUITES + (ALL,))
    verify.add_argument("--m", type=int)
    verify.add_argument("--k", type=int)
    verify.add_argument("--pair", help="multiplicity pair m1,m2 realised by a full-square system")
    verify.add_argument("--theta", type=float)
    verify.add_argument("--samples", type=int)
    verify.add_argument("--seed", type=int)
    verify.add_argument("--fd-step", dest="fd_step", type=float)
    verify.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override the tolerance of every check whose name starts with NAME")
    verify.add_argument("--output")
    verify.add_argument("--format", choices=FORMATS)
    verify.add_argument("--workers", type=int)
    verify.add_argument("--config", help="flat key = value file")
    verify.add_argument("--timing", action="store_true", default=None, help="include wall times in the report")
    verify.add_argument("--verbose", action="store_true", default=None)

    dump = commands.add_parser("dump-clifford", help="write the matrices of a Clifford system")
    dump.add_argument("--m", type=int, required=True)
    dump.add_argument("--k", type=int, required=True)
    dump.add_argument("--output", required=True)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


# ============================================================
# COMMANDS
# ============================================================
def verify_command(args: argparse.Namespace) -> int:
    cli_values = {key: value for key, value in vars(args).items() if key not in ("command", "config")}
    try:
        config = load_config(cli_values, args.config)
    except ConfigError as exc:
        print(f"❌ Configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    configure_logging(config.verbose)

    try:
        report, code = run_suite(config)
    except NumericalIntegrityError as exc:
        print(f"❌ Numerical integrity error in {exc.check}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except IsoparametricError as exc:
        print(f"❌ Numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for record in report.failures():
        print(f"❌ {record.name}: residual {record.residual:.3e} vs tolerance {record.tolerance:.1e}")
    if code == EXIT_PASSED:
        print(f"✅ All {len(report.merged())} checks passed")
    return code


def dump_command(args: argparse.Namespace) -> int:
    try:
        system = build_clifford_system(args.m, args.k)
    except DomainError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_CONFIG
    path = dump_clifford_system(system, args.output)
    print(f"📄 Clifford system m={system.m} l={system.l} written to {path}")
    return EXIT_PASSED


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "dump-clifford":
        return dump_command(args)
    return verify_command(args)


if __name__ == "__main__":
    sys.exit(main())
