import os
from dataclasses import dataclass
from typing import Optional

from app.config.settings import Settings
from app.core.dependencies import build_grid, build_potential, get_settings, load_run_config
from app.models.enums import FieldFormat
from app.models.requests import RunConfig
from app.numerics.grid import Grid
from app.numerics.potential import PotentialModel


@dataclass(frozen=True)
class CommandContext:
    """Resolved inputs shared by every subcommand"""

    run: RunConfig
    settings: Settings
    output_dir: str
    workers: int
    field_format: FieldFormat
    config_dir: Optional[str] = None

    @classmethod
    def from_args(cls, args, settings: Optional[Settings] = None) -> "CommandContext":
        """Flags override the run config, which overrides the environment settings"""
        settings = settings or get_settings()
        run = load_run_config(args.config)
        if getattr(args, "paper_literal_G", False):
            run = run.model_copy(update={"paper_literal_G": True})
        return cls(
            run=run,
            settings=settings,
            output_dir=args.out or run.output_dir or settings.output_dir,
            workers=args.workers or run.workers or settings.workers,
            field_format=run.field_format or FieldFormat(settings.field_format),
            config_dir=os.path.dirname(os.path.abspath(args.config)) if args.config else None,
        )

    def grid(self) -> Grid:
        return build_grid(self.run, self.settings)

    def potential(self) -> PotentialModel:
        return build_potential(self.run.potential, self.run.params, self.config_dir)
