"""Nodal-domain counting and weak-residual diagnostics"""

from typing import Optional

import numpy as np
from scipy import ndimage

from app.core.exceptions import ValidationError
from app.models.enums import DEFAULT_NODAL_EPS_FACTOR, Component
from app.models.requests import Params
from app.models.responses import NodalReport, NodalSensitivity
from app.numerics.functional import grad_I, pair_norm
from app.numerics.grid import Field, Pair
from app.numerics.potential import PotentialModel


def default_eps(f: Field, factor: float = DEFAULT_NODAL_EPS_FACTOR) -> float:
    """factor * max|f|; falls back to factor for a null field"""
    peak = f.max_abs()
    return factor * peak if peak > 0 else factor


def _count(mask: np.ndarray) -> int:
    # face adjacency: 2N neighbours
    structure = ndimage.generate_binary_structure(mask.ndim, 1)
    _, count = ndimage.label(mask, structure=structure)
    return int(count)


def nodal_domains(f: Field, eps: Optional[float] = None, component: Optional[Component] = None) -> NodalReport:
    """Components of {f > eps} and {f < -eps}, counted separately and summed"""
    if eps is None:
        eps = default_eps(f)
    if not eps > 0:
        raise ValidationError(f"Nodal threshold must be positive, got {eps}")
    positive = _count(f.values > eps)
    negative = _count(f.values < -eps)
    return NodalReport(
        component=component,
        threshold=float(eps),
        positive_domains=positive,
        negative_domains=negative,
        total=positive + negative,
    )


def nodal_sensitivity(f: Field, eps: Optional[float] = None) -> NodalSensitivity:
    if eps is None:
        eps = default_eps(f)
    return NodalSensitivity(
        eps=float(eps),
        total_at_eps=nodal_domains(f, eps).total,
        total_at_decade=nodal_domains(f, 10.0 * eps).total,
    )


def weak_residual(p: Pair, params: Params, model: PotentialModel) -> float:
    """||grad I(p)||_{L^2} / ||p||_{L^2}; zero exactly at discrete critical points"""
    norm = pair_norm(p)
    if norm == 0.0:
        return 0.0
    return pair_norm(grad_I(p, params, model)) / norm
