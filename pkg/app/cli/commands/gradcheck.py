from app.cli.commands import emit
from app.cli.context import CommandContext
from app.core.dependencies import get_diagnostics_service
from app.core.middleware import EXIT_OK
from app.models.enums import Subcommand


def register(subparsers, parent) -> None:
    parser = subparsers.add_parser(
        Subcommand.GRADCHECK.value,
        parents=[parent],
        help="Audit the discrete gradients against central finite differences",
    )
    parser.set_defaults(handler=handle)


def handle(ctx: CommandContext, args) -> int:
    service = get_diagnostics_service(ctx.settings, ctx.output_dir)
    _, summary = service.gradcheck(ctx.run, ctx.potential(), ctx.grid())
    emit(
        {
            "command": Subcommand.GRADCHECK.value,
            "max_relative_error": summary.max_relative_error,
            "passed": summary.passed,
        }
    )
    return EXIT_OK
