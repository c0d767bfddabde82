"""Deterministic writers for JSON reports, CSV tables and PGM sign slices"""

import csv
import json
import os
from typing import Any, Iterable, List, Sequence

import numpy as np
from PIL import Image

from app.config.logging import get_logger
from app.core.exceptions import StorageError
from app.numerics.grid import Field

logger = get_logger(__name__)

NEGATIVE_LEVEL = 0
NEUTRAL_LEVEL = 128
POSITIVE_LEVEL = 255


def _ensure_parent(path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)


def _format_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def write_json(path: str, data: Any) -> str:
    """Sorted keys and a trailing newline so equal inputs give equal bytes"""
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
    except (OSError, TypeError, ValueError) as e:
        raise StorageError(f"Could not write JSON {path}: {e}")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise StorageError(f"File not found: {path}")
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"Could not read JSON {path}: {e}")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
    except OSError as e:
        raise StorageError(f"Could not write CSV {path}: {e}")
    logger.debug(f"Wrote {path}")
    return path


def read_csv(path: str) -> List[dict]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            return list(csv.DictReader(f))
    except FileNotFoundError:
        raise StorageError(f"File not found: {path}")
    except OSError as e:
        raise StorageError(f"Could not read CSV {path}: {e}")


def sign_slice(f: Field, eps: float) -> np.ndarray:
    """Mid-plane (z = 0) slice of sign(f) as 8-bit levels"""
    c = f.grid.center_index
    plane = f.values[(slice(None), slice(None)) + (c,) * (f.grid.dims - 2)]
    levels = np.full(plane.shape, NEUTRAL_LEVEL, dtype=np.uint8)
    levels[plane > eps] = POSITIVE_LEVEL
    levels[plane < -eps] = NEGATIVE_LEVEL
    return levels


def write_sign_slice(path: str, f: Field, eps: float) -> str:
    """Binary PGM (P5, maxval 255)"""
    try:
        _ensure_parent(path)
        Image.fromarray(sign_slice(f, eps)).save(path, format="PPM")
    except (OSError, ValueError) as e:
        raise StorageError(f"Could not write PGM {path}: {e}")
    logger.debug(f"Wrote {path}")
    return path
