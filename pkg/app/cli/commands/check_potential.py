from app.cli.commands import emit
from app.cli.context import CommandContext
from app.core.dependencies import get_diagnostics_service
from app.core.middleware import EXIT_OK
from app.models.enums import Subcommand


def register(subparsers, parent) -> None:
    parser = subparsers.add_parser(
        Subcommand.CHECK_POTENTIAL.value,
        parents=[parent],
        help="Check conditions (A1)-(A4) on sampled points and report worst margins",
    )
    parser.set_defaults(handler=handle)


def handle(ctx: CommandContext, args) -> int:
    service = get_diagnostics_service(ctx.settings, ctx.output_dir)
    report = service.check_potential(ctx.run, ctx.potential(), ctx.grid())
    emit(
        {
            "command": Subcommand.CHECK_POTENTIAL.value,
            "passed": report.passed,
            "worst_margins": {r.condition: r.worst_margin for r in report.results},
        }
    )
    return EXIT_OK
