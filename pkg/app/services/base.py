import os
from abc import ABC
from typing import Optional

from app.config.logging import get_logger
from app.config.settings import Settings
from app.models.enums import FieldFormat


class BaseService(ABC):
    """Base class for solver-side services"""

    def __init__(self, settings: Settings, output_dir: Optional[str] = None):
        """Initialize base service with settings and logger

        Args:
            settings: Application settings instance
            output_dir: Directory for artifacts; defaults to settings.output_dir
        """
        self.settings = settings
        self.output_dir = output_dir or settings.output_dir
        self.logger = get_logger(self.__class__.__module__)
        self._setup_directories()

    def _setup_directories(self) -> None:
        """Create the artifact directory"""
        try:
            os.makedirs(self.output_dir, exist_ok=True)
            self.logger.debug(f"Ensured directory exists: {self.output_dir}")
        except OSError as e:
            self.logger.warning(f"Could not create directory {self.output_dir}: {e}")

    def output_path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def default_field_format(self) -> FieldFormat:
        return FieldFormat(self.settings.field_format)

    def format_quantity(self, value: float) -> str:
        """Short engineering notation for log lines

        Args:
            value: Quantity to format

        Returns:
            String with four significant digits
        """
        return f"{value:.4g}" if abs(value) >= 1e-3 or value == 0 else f"{value:.3e}"
