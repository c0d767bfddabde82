import argparse
from typing import Optional, Sequence

from app.cli.commands import check_potential, diagnose, fiber_scan, gradcheck, nodal_count, solve

COMMANDS = [solve, fiber_scan, check_potential, nodal_count, gradcheck, diagnose]


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="JSON run config (RunConfig schema); defaults apply when omitted")
    parent.add_argument("--out", help="Output directory for artifacts")
    parent.add_argument(
        "--paper-literal-G",
        dest="paper_literal_G",
        action="store_true",
        help="Use the constraint functional without the grad A . x term",
    )
    parent.add_argument("--workers", type=int, help="Concurrent multistart runs")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qss",
        description="Sign-changing solutions of a coupled quasilinear Schrodinger system",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = _common_options()
    for command in COMMANDS:
        command.register(subparsers, parent)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    if args.workers is not None and args.workers < 1:
        build_parser().error("--workers must be at least 1")
    return args
