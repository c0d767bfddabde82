"""Potential models A(x) and sampled verification of conditions (A1)-(A4)"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from app.config.logging import get_logger
from app.core.exceptions import PotentialConditionError, ValidationError
from app.models.enums import CONDITION_TOLERANCE, CheckStatus, PotentialKind
from app.models.requests import Params
from app.models.responses import ConditionResult, PotentialCheckReport
from app.numerics.grid import Field, Grid

logger = get_logger(__name__)


class PotentialModel(ABC):
    """A(x) together with its radial derivative grad A(x) . x"""

    kind: PotentialKind

    def __init__(self, A0: float, A_inf: float):
        if not A0 > 0:
            raise ValidationError(f"A0 must be positive, got {A0}")
        self.A0 = float(A0)
        self.A_inf = float(A_inf)
        self._grid_cache: Dict[Tuple[Grid, float], Tuple[np.ndarray, np.ndarray]] = {}

    @abstractmethod
    def evaluate(self, *coords: np.ndarray) -> np.ndarray:
        """A at broadcast coordinate arrays x_1, ..., x_N"""

    @abstractmethod
    def radial_derivative(self, *coords: np.ndarray) -> np.ndarray:
        """grad A(x) . x at broadcast coordinate arrays"""

    @property
    def is_constant(self) -> bool:
        return False

    def on_grid(self, grid: Grid, t: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
        """A(t x) and (grad A)(t x) . (t x) on every node, cached per (grid, t)"""
        key = (grid, float(t))
        cached = self._grid_cache.get(key)
        if cached is None:
            coords = [np.broadcast_to(t * x, grid.shape) for x in grid.coordinates()]
            values = np.broadcast_to(self.evaluate(*coords), grid.shape).astype(np.float64)
            radial = np.broadcast_to(self.radial_derivative(*coords), grid.shape).astype(np.float64)
            values.flags.writeable = False
            radial.flags.writeable = False
            cached = (values, radial)
            # t != 1 entries come from fibering scans; keep the cache small
            if t == 1.0:
                self._grid_cache[key] = cached
        return cached

    def describe(self) -> Dict[str, float]:
        return {"kind": self.kind.value, "A0": self.A0, "A_inf": self.A_inf}


class ConstantPotential(PotentialModel):
    kind = PotentialKind.CONSTANT

    def __init__(self, A0: float = 1.0):
        super().__init__(A0, A0)

    @property
    def is_constant(self) -> bool:
        return True

    def evaluate(self, *coords):
        return np.full(np.broadcast(*coords).shape, self.A0)

    def radial_derivative(self, *coords):
        return np.zeros(np.broadcast(*coords).shape)


class RationalPotential(PotentialModel):
    """A(x) = A_inf - (A_inf - A0) / (1 + |x|^2 / l^2)"""

    kind = PotentialKind.RATIONAL

    def __init__(self, A0: float = 1.0, A_inf: float = 2.0, length_scale: float = 1.0):
        if A_inf < A0:
            raise ValidationError(f"A_inf ({A_inf}) must not be below A0 ({A0})")
        super().__init__(A0, A_inf)
        self.length_scale = float(length_scale)

    def evaluate(self, *coords):
        q = sum(x ** 2 for x in coords) / self.length_scale ** 2
        return self.A_inf - (self.A_inf - self.A0) / (1.0 + q)

    def radial_derivative(self, *coords):
        q = sum(x ** 2 for x in coords) / self.length_scale ** 2
        return 2.0 * (self.A_inf - self.A0) * q / (1.0 + q) ** 2

    def describe(self):
        return {**super().describe(), "length_scale": self.length_scale}


class HarmonicPotential(PotentialModel):
    """A(x) = A0 + kappa |x|^2; unbounded, so (A1) fails whenever kappa > 0"""

    kind = PotentialKind.HARMONIC

    def __init__(self, A0: float = 1.0, curvature: float = 1.0):
        super().__init__(A0, math.inf if curvature > 0 else A0)
        self.curvature = float(curvature)

    def evaluate(self, *coords):
        return self.A0 + self.curvature * sum(x ** 2 for x in coords)

    def radial_derivative(self, *coords):
        return 2.0 * self.curvature * sum(x ** 2 for x in coords)

    def describe(self):
        return {**super().describe(), "curvature": self.curvature}


class TabulatedPotential(PotentialModel):
    """A sampled on a grid; multilinear in between, A_inf outside the table"""

    kind = PotentialKind.TABULATED

    def __init__(self, table: Field, A_inf: float, gradients: Optional[Sequence[Field]] = None):
        values = table.values
        if float(np.min(values)) <= 0:
            raise ValidationError("Tabulated potential must be positive on every node")
        super().__init__(float(np.min(values)), A_inf)
        self.table = table
        grid = table.grid
        if gradients is not None:
            if len(gradients) != grid.dims:
                raise ValidationError(
                    f"Expected {grid.dims} gradient tables, got {len(gradients)}"
                )
            self._gradients = [g.values for g in gradients]
        else:
            self._gradients = list(np.gradient(values, grid.spacing))

    def _to_index(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        grid = self.table.grid
        shape = np.broadcast(*coords).shape
        return np.stack([np.broadcast_to(x / grid.spacing + grid.center_index, shape) for x in coords])

    def _sample(self, values: np.ndarray, coords, cval: float) -> np.ndarray:
        index = self._to_index(coords)
        shape = index.shape[1:]
        # map_coordinates needs at least one sample axis
        flat = index.reshape(len(coords), -1)
        sampled = ndimage.map_coordinates(values, flat, order=1, mode="grid-constant", cval=cval)
        return sampled.reshape(shape)

    def evaluate(self, *coords):
        return self._sample(self.table.values, coords, self.A_inf)

    def radial_derivative(self, *coords):
        total = 0.0
        for component, x in zip(self._gradients, coords):
            total = total + self._sample(component, coords, 0.0) * x
        return total


def _point(x: Sequence[float]):
    return [np.array([float(c)]) for c in x]


def eval_A(model: PotentialModel, x: Sequence[float]) -> float:
    """A at a single point"""
    return float(np.asarray(model.evaluate(*_point(x))).reshape(-1)[0])


def eval_radial_derivative(model: PotentialModel, x: Sequence[float]) -> float:
    """grad A(x) . x at a single point"""
    return float(np.asarray(model.radial_derivative(*_point(x))).reshape(-1)[0])


@dataclass
class SampleSet:
    """Points x (rows of an (M, N) array), scale values sigma and rotation angles"""

    points: np.ndarray
    sigmas: np.ndarray
    angles: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 2 * math.pi, 13)[1:-1])

    @classmethod
    def default(cls, grid: Grid, stride: Optional[int] = None, far_factor: float = 1e3) -> "SampleSet":
        """Grid subsample plus points along rays far outside the box"""
        if stride is None:
            stride = max(1, (grid.points_per_axis - 1) // 16)
        axis = grid.axis[::stride]
        mesh = np.meshgrid(*([axis] * grid.dims), indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)

        directions = [np.eye(grid.dims)[k] for k in range(grid.dims)]
        directions.append(np.ones(grid.dims) / math.sqrt(grid.dims))
        radii = np.geomspace(grid.half_extent, far_factor * grid.half_extent, 12)
        far = np.array([r * d for d in directions for r in radii])
        sigmas = np.geomspace(1e-3, 1e3, 61)
        return cls(points=np.vstack([points, far]), sigmas=sigmas)


def _columns(points: np.ndarray) -> List[np.ndarray]:
    return [points[:, k] for k in range(points.shape[1])]


def _result(name: str, margins: np.ndarray, points: np.ndarray, detail: str, force_fail: bool = False):
    worst = int(np.argmin(margins)) if margins.size else 0
    worst_margin = float(margins[worst]) if margins.size else 0.0
    failing = np.flatnonzero(margins < 0) if margins.size else np.array([], dtype=int)
    passed = not force_fail and failing.size == 0
    violation = None
    if not passed:
        index = int(failing[0]) if failing.size else worst
        violation = [float(c) for c in points[index % len(points)]]
    return ConditionResult(
        condition=name,
        status=CheckStatus.PASS if passed else CheckStatus.FAIL,
        worst_margin=worst_margin,
        violation=violation,
        detail=detail,
    )


def _check_bounds(model: PotentialModel, samples: SampleSet) -> ConditionResult:
    A = np.asarray(model.evaluate(*_columns(samples.points)), dtype=np.float64)
    if not math.isfinite(model.A_inf):
        margins = np.full(A.shape, -math.inf)
        return _result("A1", margins, samples.points[np.argsort(-A)], "A_inf is not finite: A is unbounded", True)
    margins = np.minimum(A - model.A0, model.A_inf - A) + CONDITION_TOLERANCE
    return _result("A1", margins, samples.points, f"A0={model.A0:g} <= A(x) <= A_inf={model.A_inf:g}")


def _check_radial(model: PotentialModel, params: Params, samples: SampleSet) -> ConditionResult:
    columns = _columns(samples.points)
    A = np.asarray(model.evaluate(*columns), dtype=np.float64)
    radial = np.asarray(model.radial_derivative(*columns), dtype=np.float64)
    finite = np.isfinite(radial)
    margins = np.where(finite, (params.p - 2.0) * A - radial + CONDITION_TOLERANCE, -math.inf)
    return _result("A2", margins, samples.points, "(alpha+beta-2) A(x) - grad A(x) . x >= 0")


def _check_concavity(model: PotentialModel, params: Params, samples: SampleSet) -> ConditionResult:
    """Chord test of sigma -> sigma^{(N+2)/(N+p)} A(sigma^{1/(N+p)} x) on consecutive triples"""
    sigmas = np.sort(np.asarray(samples.sigmas, dtype=np.float64))
    if sigmas.size < 3:
        raise ValidationError("Concavity check needs at least three sigma samples")
    exponent = 1.0 / (params.N + params.p)
    columns = _columns(samples.points)
    phi = np.stack(
        [
            sigma ** ((params.N + 2) * exponent)
            * np.asarray(model.evaluate(*(sigma ** exponent * x for x in columns)), dtype=np.float64)
            for sigma in sigmas
        ]
    )
    s0, s1, s2 = sigmas[:-2, None], sigmas[1:-1, None], sigmas[2:, None]
    chord = phi[:-2] + (phi[2:] - phi[:-2]) * (s1 - s0) / (s2 - s0)
    defect = (chord - phi[1:-1]) / (1.0 + np.abs(phi[1:-1]))
    margins = CONDITION_TOLERANCE - np.max(defect, axis=0)
    return _result(
        "A3", margins, samples.points, "sigma^{(N+2)/(N+a+b)} A(sigma^{1/(N+a+b)} x) is concave"
    )


def _check_rotation(model: PotentialModel, samples: SampleSet) -> ConditionResult:
    columns = _columns(samples.points)
    A = np.asarray(model.evaluate(*columns), dtype=np.float64)
    angles = samples.angles
    if model.kind == PotentialKind.TABULATED:
        angles = np.array([math.pi / 2, math.pi, 3 * math.pi / 2])
    worst = np.full(A.shape, -math.inf)
    for phi in angles:
        c, s = math.cos(phi), math.sin(phi)
        if abs(c) < 1e-15:
            c = 0.0
        if abs(s) < 1e-15:
            s = 0.0
        rotated = [c * columns[0] - s * columns[1], s * columns[0] + c * columns[1]] + columns[2:]
        gap = np.abs(np.asarray(model.evaluate(*rotated), dtype=np.float64) - A)
        worst = np.maximum(worst, gap)
    margins = CONDITION_TOLERANCE * (1.0 + np.abs(A)) - worst
    return _result("A4", margins, samples.points, "A(R y, z) = A(y, z) for sampled rotations R")


def check_conditions(model: PotentialModel, params: Params, samples: SampleSet) -> PotentialCheckReport:
    """Evaluate (A1)-(A4) at every sample; report worst margins and first violations"""
    if samples.points.ndim != 2 or samples.points.shape[1] != params.N:
        raise ValidationError(
            f"Sample points must have shape (M, {params.N}), got {samples.points.shape}"
        )
    results = [
        _check_bounds(model, samples),
        _check_radial(model, params, samples),
        _check_concavity(model, params, samples),
        _check_rotation(model, samples),
    ]
    for r in results:
        logger.debug(f"{r.condition}: {r.status.value} (worst margin {r.worst_margin:.3e})")
    return PotentialCheckReport(potential=model.describe(), results=results)


def require_conditions(model: PotentialModel, params: Params, samples: SampleSet) -> PotentialCheckReport:
    report = check_conditions(model, params, samples)
    failed = report.failed_conditions
    if failed:
        raise PotentialConditionError(
            "Potential violates condition(s) " + ", ".join(f"({name})" for name in failed),
            failed_conditions=failed,
        )
    return report
