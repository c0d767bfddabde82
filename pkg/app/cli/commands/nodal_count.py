from app.cli.commands import emit
from app.cli.context import CommandContext
from app.core.dependencies import get_diagnostics_service
from app.core.exceptions import ValidationError
from app.core.middleware import EXIT_OK
from app.models.enums import Subcommand


def register(subparsers, parent) -> None:
    parser = subparsers.add_parser(
        Subcommand.NODAL_COUNT.value,
        parents=[parent],
        help="Count nodal domains of a QSSFIELD dump",
    )
    parser.add_argument("--field", help="Field dump; overrides nodal_count.field_path")
    parser.add_argument("--eps-factor", type=float, help="Threshold as a multiple of max|f|")
    parser.set_defaults(handler=handle)


def handle(ctx: CommandContext, args) -> int:
    path = args.field or ctx.run.nodal_count.field_path
    if not path:
        raise ValidationError("nodal-count needs --field or nodal_count.field_path")
    service = get_diagnostics_service(ctx.settings, ctx.output_dir)
    report = service.nodal_count(ctx.run, path, args.eps_factor)
    emit({"command": Subcommand.NODAL_COUNT.value, **report.model_dump(mode="json")})
    return EXIT_OK
