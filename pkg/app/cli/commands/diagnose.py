import os

from app.cli.commands import emit
from app.cli.context import CommandContext
from app.core.dependencies import build_potential, get_diagnostics_service, parse_run_config
from app.core.exceptions import ValidationError
from app.core.middleware import EXIT_OK
from app.models.enums import Subcommand


def register(subparsers, parent) -> None:
    parser = subparsers.add_parser(
        Subcommand.DIAGNOSE.value,
        parents=[parent],
        help="Re-verify a solve report from fresh evaluations",
    )
    parser.add_argument("--report", help="solve_report.json; overrides diagnose.report_path")
    parser.set_defaults(handler=handle)


def handle(ctx: CommandContext, args) -> int:
    path = args.report or ctx.run.diagnose.report_path
    if not path:
        raise ValidationError("diagnose needs --report or diagnose.report_path")
    service = get_diagnostics_service(ctx.settings, ctx.output_dir)
    summary = service.load_report(path)

    # the solve-time config decides the problem; the current one only sets tolerances
    solved = parse_run_config(summary.config)
    run = solved.model_copy(update={"diagnose": ctx.run.diagnose})
    model = build_potential(run.potential, run.params, ctx.config_dir or os.path.dirname(os.path.abspath(path)))

    result = service.diagnose(summary, path, run, model)
    emit({"command": Subcommand.DIAGNOSE.value, "passed": result.passed, "checks": len(result.checks)})
    return EXIT_OK
