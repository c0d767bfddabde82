"""QSSFIELD v1 field dumps: a text variant and a raw little-endian float64 variant.

Text:  header line ``QSSFIELD v1 N n L component`` then n^N values, one per line.
Raw:   ``<name>.f64`` holds the values, ``<name>.f64.hdr`` holds the header line.
Values are in lexicographic (C) node order in both variants.
"""

import os
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.config.logging import get_logger
from app.core.exceptions import StorageError, ValidationError
from app.models.enums import FIELD_MAGIC, FIELD_VERSION, FieldFormat
from app.numerics.grid import Field, Grid

logger = get_logger(__name__)

RAW_SUFFIX = ".f64"
HEADER_SUFFIX = ".hdr"


@dataclass(frozen=True)
class FieldHeader:
    dims: int
    points_per_axis: int
    half_extent: float
    component: str

    def format(self) -> str:
        return (
            f"{FIELD_MAGIC} {FIELD_VERSION} {self.dims} {self.points_per_axis} "
            f"{self.half_extent!r} {self.component}"
        )

    @classmethod
    def parse(cls, line: str) -> "FieldHeader":
        tokens = line.split()
        if len(tokens) != 6 or tokens[0] != FIELD_MAGIC:
            raise StorageError(f"Not a {FIELD_MAGIC} header: {line.strip()[:80]!r}")
        if tokens[1] != FIELD_VERSION:
            raise StorageError(f"Unsupported field version {tokens[1]!r}")
        try:
            return cls(int(tokens[2]), int(tokens[3]), float(tokens[4]), tokens[5])
        except ValueError as e:
            raise StorageError(f"Malformed field header {line.strip()!r}: {e}")

    def grid(self) -> Grid:
        try:
            return Grid(self.dims, self.half_extent, self.points_per_axis)
        except ValidationError as e:
            raise StorageError(f"Field header describes an invalid grid: {e}")


def field_path(directory: str, stem: str, fmt: FieldFormat) -> str:
    suffix = RAW_SUFFIX if fmt == FieldFormat.RAW else ".txt"
    return os.path.join(directory, f"{stem}{suffix}")


def write_field(path: str, field: Field, component: str, fmt: FieldFormat = FieldFormat.TEXT) -> str:
    """Write a dump; returns the path of the values file"""
    grid = field.grid
    header = FieldHeader(grid.dims, grid.points_per_axis, grid.half_extent, component).format()
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        if fmt == FieldFormat.RAW:
            with open(path + HEADER_SUFFIX, "w", encoding="utf-8", newline="\n") as f:
                f.write(header + "\n")
            field.values.astype("<f8").ravel(order="C").tofile(path)
        else:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(header + "\n")
                np.savetxt(f, field.values.ravel(order="C"), fmt="%.17g")
    except OSError as e:
        raise StorageError(f"Could not write field dump {path}: {e}")
    logger.debug(f"Wrote {fmt.value} field dump {path}")
    return path


def read_field(path: str) -> Tuple[Field, str]:
    """Read either variant; the raw variant is recognised by its header sidecar"""
    sidecar = path + HEADER_SUFFIX
    try:
        if os.path.exists(sidecar):
            with open(sidecar, "r", encoding="utf-8") as f:
                header = FieldHeader.parse(f.readline())
            values = np.fromfile(path, dtype="<f8")
        else:
            with open(path, "r", encoding="utf-8") as f:
                header = FieldHeader.parse(f.readline())
                values = np.loadtxt(f, dtype=np.float64, ndmin=1)
    except FileNotFoundError:
        raise StorageError(f"Field dump not found: {path}")
    except (OSError, ValueError) as e:
        raise StorageError(f"Could not read field dump {path}: {e}")

    grid = header.grid()
    if values.size != grid.size:
        raise StorageError(
            f"Field dump {path} holds {values.size} values, header expects {grid.size}"
        )
    try:
        field = Field(grid, values.reshape(grid.shape))
    except ValidationError as e:
        raise StorageError(f"Field dump {path} is invalid: {e}")
    return field, header.component
