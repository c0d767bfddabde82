from app.cli.commands import emit
from app.cli.context import CommandContext
from app.core.dependencies import get_solver_service
from app.core.middleware import EXIT_OK
from app.models.enums import Subcommand
from app.numerics.potential import SampleSet, require_conditions


def register(subparsers, parent) -> None:
    parser = subparsers.add_parser(
        Subcommand.SOLVE.value,
        parents=[parent],
        help="Minimize the energy over the constraint manifold in the equivariant subspace",
    )
    parser.set_defaults(handler=handle)


def handle(ctx: CommandContext, args) -> int:
    grid = ctx.grid()
    model = ctx.potential()
    require_conditions(model, ctx.run.params, SampleSet.default(grid))

    service = get_solver_service(ctx.settings, ctx.output_dir)
    summary = service.solve_run(ctx.run, model, grid, ctx.workers, ctx.field_format)
    emit(
        {
            "command": Subcommand.SOLVE.value,
            "m": summary.m.m,
            "spread": summary.m.spread,
            "best_run": summary.best_run,
            "report": service.output_path("solve_report.json"),
        }
    )
    return EXIT_OK
