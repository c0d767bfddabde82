import os
from unittest.mock import patch

from app.models.enums import FieldFormat
from app.services.base import BaseService


class TestBaseService:
    """Test the BaseService class"""

    def test_initialization(self, test_settings):
        """Test that BaseService initializes correctly"""
        service = BaseService(test_settings)

        assert service.settings == test_settings
        assert service.logger is not None
        # Logger name includes the app prefix
        assert "services.base" in service.logger.name

    def test_directory_creation(self, test_settings):
        """Test that the artifact directory is created"""
        service = BaseService(test_settings)

        assert os.path.isdir(test_settings.output_dir)
        assert service.output_dir == test_settings.output_dir

    def test_output_dir_override(self, test_settings, temp_dir):
        """Test that an explicit output directory wins over settings"""
        target = os.path.join(temp_dir, "override")

        service = BaseService(test_settings, target)

        assert service.output_path("trace.csv") == os.path.join(target, "trace.csv")
        assert os.path.isdir(target)

    def test_default_field_format(self, test_settings):
        """Test the field format taken from settings"""
        test_settings.field_format = "raw"

        assert BaseService(test_settings).default_field_format() == FieldFormat.RAW

    def test_format_quantity(self, base_service):
        """Test quantity formatting for log lines"""
        assert base_service.format_quantity(0) == "0"
        assert base_service.format_quantity(12.3456) == "12.35"
        assert base_service.format_quantity(1.5e-7) == "1.500e-07"

    @patch("os.makedirs")
    def test_directory_creation_error_handling(self, mock_makedirs, test_settings):
        """Test that directory creation errors are handled gracefully"""
        mock_makedirs.side_effect = OSError("Permission denied")

        # Should not raise an exception due to error handling
        service = BaseService(test_settings)
        assert service.settings == test_settings
