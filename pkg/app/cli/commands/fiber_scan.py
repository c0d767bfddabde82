from app.cli.commands import emit
from app.cli.context import CommandContext
from app.core.dependencies import get_diagnostics_service
from app.core.middleware import EXIT_OK
from app.models.enums import Subcommand


def register(subparsers, parent) -> None:
    parser = subparsers.add_parser(
        Subcommand.FIBER_SCAN.value,
        parents=[parent],
        help="Tabulate h(t), h'(t) and G(u_t, v_t) along the scaling orbit of the seed",
    )
    parser.set_defaults(handler=handle)


def handle(ctx: CommandContext, args) -> int:
    service = get_diagnostics_service(ctx.settings, ctx.output_dir)
    rows, summary = service.fiber_scan(ctx.run, ctx.potential(), ctx.grid())
    emit(
        {
            "command": Subcommand.FIBER_SCAN.value,
            "rows": len(rows),
            "tbar": summary.tbar,
            "sign_changes": summary.sign_changes,
            "csv": service.output_path("fiber_scan.csv"),
        }
    )
    return EXIT_OK
