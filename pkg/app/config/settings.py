from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings and configuration"""

    model_config = SettingsConfigDict(
        env_prefix="QSS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "Nodal Quasilinear Solver"
    app_version: str = "1.0.0"
    debug: bool = False

    # Storage Configuration
    output_dir: str = "data/results"
    log_dir: str = "data/logs"
    field_format: Literal["text", "raw"] = Field(
        "text", description="Default QSSFIELD v1 dump variant for solved fields"
    )

    # Processing Configuration
    workers: int = Field(1, ge=1, description="Concurrent multistart runs inside `solve`")
    max_nodes: int = Field(
        4_000_000, ge=27, description="Refuse grids with more nodes than this (memory guard)"
    )
