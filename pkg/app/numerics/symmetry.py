"""Dihedral group G_s acting on (y1, y2) and the determinant-twisted action on fields.

Fields in the equivariant subspace satisfy f(g x) = det(g) f(x). ``act`` implements
x -> det(g) f(g^{-1} x), so membership is equivalent to act(g, f) == f for every g.
"""

import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy import ndimage

from app.config.logging import get_logger
from app.core.exceptions import SymmetryError
from app.numerics.grid import Field, Pair

logger = get_logger(__name__)

SNAP_TOLERANCE = 1e-12
ORTHOGONALITY_TOLERANCE = 1e-12


def _snap(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=np.float64)
    for target in (-1.0, 0.0, 1.0):
        out[np.abs(out - target) < SNAP_TOLERANCE] = target
    return out


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Orthogonal 2x2 matrix on the (y1, y2) plane with its determinant sign"""

    matrix: np.ndarray
    det_sign: int

    def __post_init__(self):
        matrix = _snap(self.matrix)
        if matrix.shape != (2, 2):
            raise SymmetryError(f"Group element must be 2x2, got shape {matrix.shape}")
        if np.max(np.abs(matrix.T @ matrix - np.eye(2))) > ORTHOGONALITY_TOLERANCE:
            raise SymmetryError("Group element is not orthogonal")
        det = float(np.linalg.det(matrix))
        if self.det_sign not in (1, -1) or abs(det - self.det_sign) > ORTHOGONALITY_TOLERANCE:
            raise SymmetryError(f"det_sign {self.det_sign} does not match determinant {det:.3g}")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def rotation(cls, angle: float) -> "GroupElement":
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, -s], [s, c]]), 1)

    @classmethod
    def reflection(cls, line_angle: float) -> "GroupElement":
        """Reflection across the line through the origin at angle line_angle"""
        c, s = math.cos(2 * line_angle), math.sin(2 * line_angle)
        return cls(np.array([[c, s], [s, -c]]), -1)

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(np.eye(2), 1)

    def compose(self, other: "GroupElement") -> "GroupElement":
        """self . other (apply other first)"""
        return GroupElement(self.matrix @ other.matrix, self.det_sign * other.det_sign)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.matrix.T, self.det_sign)

    @property
    def is_rotation(self) -> bool:
        return self.det_sign == 1

    @property
    def angle(self) -> float:
        """Rotation angle in [0, 2pi) or, for reflections, twice the mirror-line angle"""
        return math.atan2(self.matrix[1, 0], self.matrix[0, 0]) % (2 * math.pi)

    @property
    def is_signed_permutation(self) -> bool:
        """True when the element maps lattice nodes to lattice nodes"""
        m = self.matrix
        return bool(np.all(np.isin(m, (-1.0, 0.0, 1.0))) and np.all(np.sum(np.abs(m), axis=1) == 1))

    def approx_equal(self, other: "GroupElement", tol: float = 1e-9) -> bool:
        return self.det_sign == other.det_sign and np.max(np.abs(self.matrix - other.matrix)) < tol

    def label(self) -> str:
        kind = "rot" if self.is_rotation else "ref"
        return f"{kind}:{math.degrees(self.angle):.6g}"


@dataclass(frozen=True)
class DihedralGroup:
    """Closure of {rotation by 2pi/s, reflection} with exactly 2s elements"""

    s: int
    elements: Tuple[GroupElement, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def rotations(self) -> List[GroupElement]:
        return [g for g in self.elements if g.is_rotation]

    @property
    def reflections(self) -> List[GroupElement]:
        return [g for g in self.elements if not g.is_rotation]

    @property
    def is_exact_on_lattice(self) -> bool:
        return all(g.is_signed_permutation for g in self.elements)

    def contains(self, g: GroupElement) -> bool:
        return any(g.approx_equal(h) for h in self.elements)


def build_group(s: int) -> DihedralGroup:
    """Enumerate G_s by breadth-first closure over its two generators"""
    if not isinstance(s, (int, np.integer)) or s < 2:
        raise SymmetryError(f"Symmetry order s must be an integer >= 2, got {s!r}")

    generators = [
        GroupElement.rotation(2 * math.pi / s),
        # for s = 2 this is (y1, y2) -> (-y1, y2)
        GroupElement.reflection(math.pi / s),
    ]
    elements: List[GroupElement] = [GroupElement.identity()]
    queue = deque(elements)
    while queue:
        g = queue.popleft()
        for gen in generators:
            candidate = gen.compose(g)
            if not any(candidate.approx_equal(h) for h in elements):
                elements.append(candidate)
                queue.append(candidate)
                if len(elements) > 2 * s:
                    raise SymmetryError(f"Group generated for s={s} exceeds order {2 * s}")

    rotations = sum(1 for g in elements if g.is_rotation)
    if len(elements) != 2 * s or rotations != s:
        raise SymmetryError(
            f"Generated group has order {len(elements)} with {rotations} rotations; expected 2s={2 * s}"
        )

    elements.sort(key=lambda g: (-g.det_sign, round(g.angle, 9)))
    logger.debug(f"Built dihedral group G_{s} of order {len(elements)}")
    return DihedralGroup(s=s, elements=tuple(elements))


def _act_exact(matrix: np.ndarray, values: np.ndarray) -> np.ndarray:
    """values sampled at (M o) for index offsets o, M a signed permutation"""
    columns = [int(np.argmax(np.abs(matrix[r]))) for r in range(2)]
    out = values
    for r in range(2):
        if matrix[r, columns[r]] < 0:
            out = np.flip(out, axis=r)
    if columns == [1, 0]:
        out = np.swapaxes(out, 0, 1)
    return out


def _act_interpolated(matrix: np.ndarray, f: Field) -> np.ndarray:
    grid = f.grid
    c = grid.center_index
    offsets = np.broadcast_arrays(*grid.index_offsets())
    y1 = matrix[0, 0] * offsets[0] + matrix[0, 1] * offsets[1]
    y2 = matrix[1, 0] * offsets[0] + matrix[1, 1] * offsets[1]
    coords = np.stack([c + y1, c + y2] + [c + o for o in offsets[2:]])
    return ndimage.map_coordinates(f.values, coords, order=1, mode="grid-constant", cval=0.0)


def act(g: GroupElement, f: Field) -> Field:
    """(g f)(x) = det(g) f(g^{-1} x); g fixes the coordinates z_3..z_N"""
    if f.grid.dims < 3:
        raise SymmetryError("The group acts on grids of dimension at least 3")
    inverse = g.matrix.T
    if g.is_signed_permutation:
        values = _act_exact(inverse, f.values)
    else:
        values = _act_interpolated(inverse, f)
    return Field(f.grid, g.det_sign * values)


def act_pair(g: GroupElement, p: Pair) -> Pair:
    return p.map(lambda f: act(g, f))


def symmetrize(f: Field, group: DihedralGroup) -> Field:
    """Average of det(g) f(g^{-1} x) over the group: projection onto the equivariant subspace"""
    total = np.zeros(f.grid.shape)
    for g in group.elements:
        total += act(g, f).values
    return Field(f.grid, total / group.order)


def symmetrize_pair(p: Pair, group: DihedralGroup) -> Pair:
    return p.map(lambda f: symmetrize(f, group))


def field_defect(f: Field, group: DihedralGroup) -> float:
    return max(float(np.max(np.abs(act(g, f).values - f.values))) for g in group.elements)


def equivariance_defect(p: Pair, group: DihedralGroup) -> float:
    """max over g and nodes of |f(g x) - det(g) f(x)| for both components"""
    return max(field_defect(f, group) for f in p.components())


def sign_change_fractions(f: Field, group: DihedralGroup, eps: float) -> Dict[str, float]:
    """Per reflection: share of nodes with |f| > eps whose mirror image has the opposite sign"""
    significant = np.abs(f.values) > eps
    count = int(np.count_nonzero(significant))
    fractions = {}
    for g in group.reflections:
        # for an involution, act(g, f)(x) = -f(g x)
        mirrored = -act(g, f).values
        flipped = np.count_nonzero(significant & (f.values * mirrored < 0))
        fractions[g.label()] = float(flipped / count) if count else 0.0
    return fractions
