import os

import numpy as np
import pytest

from app.core.exceptions import StorageError
from app.numerics.grid import Grid
from app.storage.artifacts import read_csv, read_json, sign_slice, write_csv, write_json, write_sign_slice
from tests.conftest import angular_gaussian


class TestJsonArtifacts:
    """Test deterministic JSON output"""

    def test_sorted_keys_and_trailing_newline(self, temp_dir):
        """Test the canonical layout"""
        path = write_json(os.path.join(temp_dir, "report.json"), {"b": 1, "a": [1.5, 2]})

        with open(path) as f:
            text = f.read()

        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')
        assert read_json(path) == {"a": [1.5, 2], "b": 1}

    def test_identical_inputs_give_identical_bytes(self, temp_dir):
        """Test byte-for-byte determinism"""
        data = {"m": 12.345678901234567, "runs": [{"z": 1, "y": 2}]}
        first = write_json(os.path.join(temp_dir, "one.json"), data)
        second = write_json(os.path.join(temp_dir, "two.json"), dict(reversed(list(data.items()))))

        with open(first, "rb") as a, open(second, "rb") as b:
            assert a.read() == b.read()

    def test_creates_parent_directories(self, temp_dir):
        """Test that nested output paths are created"""
        path = write_json(os.path.join(temp_dir, "nested", "deeper", "x.json"), {})

        assert os.path.exists(path)

    def test_read_errors(self, temp_dir):
        """Test missing and malformed JSON files"""
        bad = os.path.join(temp_dir, "bad.json")
        with open(bad, "w") as f:
            f.write("{not json")

        with pytest.raises(StorageError):
            read_json(os.path.join(temp_dir, "missing.json"))
        with pytest.raises(StorageError):
            read_json(bad)

    def test_unserializable_data(self, temp_dir):
        """Test that unserializable values are a storage error"""
        with pytest.raises(StorageError):
            write_json(os.path.join(temp_dir, "x.json"), {"f": object()})


class TestCsvArtifacts:
    """Test CSV tables"""

    def test_floats_written_with_repr(self, temp_dir):
        """Test that floats keep full precision"""
        path = write_csv(os.path.join(temp_dir, "trace.csv"), ["iter", "I"], [[0, 0.1], [1, 1 / 3]])

        rows = read_csv(path)

        assert rows[0] == {"iter": "0", "I": "0.1"}
        assert float(rows[1]["I"]) == 1 / 3

    def test_header_only(self, temp_dir):
        """Test an empty table"""
        path = write_csv(os.path.join(temp_dir, "empty.csv"), ["t", "h"], [])

        with open(path) as f:
            assert f.read() == "t,h\n"


class TestSignSlices:
    """Test PGM images of the mid-plane sign pattern"""

    def test_levels(self):
        """Test the three gray levels"""
        field = angular_gaussian(Grid(3, 4.0, 17))

        levels = sign_slice(field, 1e-3 * field.max_abs())

        assert levels.shape == (17, 17)
        assert set(np.unique(levels)) == {0, 128, 255}
        # sin(2 theta) > 0 in the first quadrant
        assert levels[12, 12] == 255
        assert levels[4, 12] == 0

    def test_binary_pgm(self, temp_dir):
        """Test that the image is written as binary PGM"""
        field = angular_gaussian(Grid(3, 4.0, 17))
        path = write_sign_slice(os.path.join(temp_dir, "u_slice.pgm"), field, 1e-3)

        with open(path, "rb") as f:
            assert f.read(2) == b"P5"
