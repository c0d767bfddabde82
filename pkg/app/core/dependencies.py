import os
from functools import lru_cache
from typing import Optional

from pydantic import ValidationError as PydanticValidationError

from app.config.settings import Settings
from app.core.exceptions import ConfigurationError, ValidationError
from app.models.enums import PotentialKind
from app.models.requests import Params, PotentialSpec, RunConfig
from app.numerics.grid import Grid
from app.numerics.potential import (
    ConstantPotential,
    HarmonicPotential,
    PotentialModel,
    RationalPotential,
    TabulatedPotential,
)
from app.services.diagnostics import DiagnosticsService
from app.services.solver import SolverService
from app.storage.artifacts import read_json
from app.storage.fields import read_field


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


def _describe_validation_error(e: PydanticValidationError) -> str:
    first = e.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or "config"
    message = first.get("msg", str(e))
    return f"{location}: {message}"


def parse_run_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid run config: {_describe_validation_error(e)}")


def load_run_config(path: Optional[str]) -> RunConfig:
    """Read a JSON run config; no path means all defaults"""
    if path is None:
        return RunConfig()
    data = read_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"Run config {path} must be a JSON object")
    return parse_run_config(data)


def build_grid(run: RunConfig, settings: Optional[Settings] = None) -> Grid:
    settings = settings or get_settings()
    grid = Grid(run.params.N, run.grid.half_extent, run.grid.points_per_axis)
    if grid.size > settings.max_nodes:
        raise ConfigurationError(
            f"Grid with {grid.size} nodes exceeds max_nodes={settings.max_nodes}"
        )
    return grid


def _resolve(path: str, base_dir: Optional[str]) -> str:
    if base_dir and not os.path.isabs(path):
        return os.path.join(base_dir, path)
    return path


def build_potential(spec: PotentialSpec, params: Params, base_dir: Optional[str] = None) -> PotentialModel:
    """Instantiate the potential model; tabulated tables are resolved against base_dir"""
    if spec.kind == PotentialKind.CONSTANT:
        return ConstantPotential(spec.A0)
    if spec.kind == PotentialKind.RATIONAL:
        return RationalPotential(spec.A0, spec.A_inf, spec.length_scale)
    if spec.kind == PotentialKind.HARMONIC:
        return HarmonicPotential(spec.A0, spec.curvature)

    table, _ = read_field(_resolve(spec.table_path, base_dir))
    if table.grid.dims != params.N:
        raise ValidationError(
            f"Potential table has dimension {table.grid.dims}, params require N={params.N}"
        )
    gradients = None
    if spec.gradient_paths:
        gradients = [read_field(_resolve(path, base_dir))[0] for path in spec.gradient_paths]
        if any(g.grid != table.grid for g in gradients):
            raise ValidationError("Gradient tables must share the grid of the potential table")
    return TabulatedPotential(table, spec.A_inf, gradients)


def get_solver_service(settings: Optional[Settings] = None, output_dir: Optional[str] = None) -> SolverService:
    """Get solver service instance"""
    return SolverService(settings or get_settings(), output_dir)


def get_diagnostics_service(
    settings: Optional[Settings] = None, output_dir: Optional[str] = None
) -> DiagnosticsService:
    """Get diagnostics service instance"""
    return DiagnosticsService(settings or get_settings(), output_dir)
