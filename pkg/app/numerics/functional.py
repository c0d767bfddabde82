"""Energy I, Nehari-Pohozaev functional G, Pohozaev functional P and exact discrete gradients.

With the integrals

    K = 1/2 int(|grad u|^2 + |grad v|^2)      M = 1/2 int(A u^2 + B v^2)
    Q = 1/2 int(u^2 |grad u|^2 + v^2 |grad v|^2)
    C = int |u|^alpha |v|^beta                R = 1/2 int (grad A . x) u^2

and p = alpha + beta:

    I = K + M + Q - (2/p) C
    G = N K + (N+2)(M + Q) - (2(N+p)/p) C + R
    P = (N-2)(K + Q) + N M + R - (2N/p) C
    J = I - G/(N+p) = (p K + (p-2)(M + Q) - R) / (N+p)

Gradients are L^2 representers of the discrete functionals: the directional
derivative along q equals h^N * sum(grad * q) over nodes.
"""

from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from app.config.logging import get_logger
from app.models.requests import Params
from app.numerics.grid import Grid, Pair, adjoint_divergence, partial_derivatives
from app.numerics.potential import PotentialModel

logger = get_logger(__name__)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Every integral entering I, G and P, each with its 1/2 weight where applicable"""

    kinetic: float
    mass: float
    quasilinear: float
    coupling: float
    radial_term: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)

    def as_row(self) -> List[float]:
        return [self.kinetic, self.mass, self.quasilinear, self.coupling, self.radial_term]


BREAKDOWN_HEADER = ["kinetic", "mass", "quasilinear", "coupling", "radial_term"]


def _coupling_density(u: np.ndarray, v: np.ndarray, params: Params) -> np.ndarray:
    # 0^gamma = 0 for gamma > 0
    return np.abs(u) ** params.alpha * np.abs(v) ** params.beta


def _component_terms(values: np.ndarray, grid: Grid) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    derivatives = partial_derivatives(values, grid)
    return derivatives, sum(d ** 2 for d in derivatives)


def breakdown(p: Pair, params: Params, model: PotentialModel) -> EnergyBreakdown:
    grid = p.grid
    u, v = p.u.values, p.v.values
    A, radial = model.on_grid(grid)
    _, grad_u2 = _component_terms(u, grid)
    _, grad_v2 = _component_terms(v, grid)
    w = grid.cell_volume
    return EnergyBreakdown(
        kinetic=0.5 * w * float(np.sum(grad_u2 + grad_v2)),
        mass=0.5 * w * float(np.sum(A * u ** 2 + params.B * v ** 2)),
        quasilinear=0.5 * w * float(np.sum(u ** 2 * grad_u2 + v ** 2 * grad_v2)),
        coupling=w * float(np.sum(_coupling_density(u, v, params))),
        radial_term=0.5 * w * float(np.sum(radial * u ** 2)),
    )


def _energy(b: EnergyBreakdown, params: Params) -> float:
    return b.kinetic + b.mass + b.quasilinear - (2.0 / params.p) * b.coupling


def _constraint_terms(b: EnergyBreakdown, params: Params, paper_literal: bool) -> List[float]:
    N, p = params.N, params.p
    terms = [
        N * b.kinetic,
        (N + 2) * (b.mass + b.quasilinear),
        -(2.0 * (N + p) / p) * b.coupling,
    ]
    if not paper_literal:
        terms.append(b.radial_term)
    return terms


def _pohozaev_terms(b: EnergyBreakdown, params: Params) -> List[float]:
    N, p = params.N, params.p
    return [
        (N - 2) * (b.kinetic + b.quasilinear),
        N * b.mass,
        b.radial_term,
        -(2.0 * N / p) * b.coupling,
    ]


def energy_I(p: Pair, params: Params, model: PotentialModel) -> float:
    return _energy(breakdown(p, params, model), params)


def constraint_G(p: Pair, params: Params, model: PotentialModel, paper_literal: bool = False) -> float:
    """t d/dt I(u_t, v_t) at t = 1; paper_literal drops the (grad A . x) term"""
    return float(sum(_constraint_terms(breakdown(p, params, model), params, paper_literal)))


def constraint_scale(p: Pair, params: Params, model: PotentialModel, paper_literal: bool = False) -> float:
    """Sum of absolute values of the terms of G, the reference for relative tolerances"""
    return float(sum(abs(t) for t in _constraint_terms(breakdown(p, params, model), params, paper_literal)))


def pohozaev_P(p: Pair, params: Params, model: PotentialModel) -> float:
    return float(sum(_pohozaev_terms(breakdown(p, params, model), params)))


def pohozaev_scale(p: Pair, params: Params, model: PotentialModel) -> float:
    return float(sum(abs(t) for t in _pohozaev_terms(breakdown(p, params, model), params)))


def reduced_J(p: Pair, params: Params, model: PotentialModel) -> float:
    """Coupling-free form of I - G/(N+p); nonnegative whenever (A2) holds"""
    b = breakdown(p, params, model)
    N, q = params.N, params.p
    return (q * b.kinetic + (q - 2.0) * (b.mass + b.quasilinear) - b.radial_term) / (N + q)


def coupling(p: Pair, params: Params) -> float:
    """int |u|^alpha |v|^beta"""
    return p.grid.cell_volume * float(np.sum(_coupling_density(p.u.values, p.v.values, params)))


@dataclass(frozen=True)
class GradientTerms:
    """L^2 representers of the derivatives of K, M, Q, C and R"""

    kinetic: Pair
    mass: Pair
    quasilinear: Pair
    coupling: Pair
    radial: Pair


def _component_gradients(values: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    derivatives, grad2 = _component_terms(values, grid)
    kinetic = adjoint_divergence(derivatives, grid)
    quasilinear = values * grad2 + adjoint_divergence([values ** 2 * d for d in derivatives], grid)
    return kinetic, quasilinear


def gradient_terms(p: Pair, params: Params, model: PotentialModel) -> GradientTerms:
    grid = p.grid
    u, v = p.u.values, p.v.values
    A, radial = model.on_grid(grid)
    kinetic_u, quasi_u = _component_gradients(u, grid)
    kinetic_v, quasi_v = _component_gradients(v, grid)
    abs_u, abs_v = np.abs(u), np.abs(v)
    coupling_u = params.alpha * np.sign(u) * abs_u ** (params.alpha - 1) * abs_v ** params.beta
    coupling_v = params.beta * np.sign(v) * abs_v ** (params.beta - 1) * abs_u ** params.alpha
    return GradientTerms(
        kinetic=Pair.from_arrays(grid, kinetic_u, kinetic_v),
        mass=Pair.from_arrays(grid, A * u, params.B * v),
        quasilinear=Pair.from_arrays(grid, quasi_u, quasi_v),
        coupling=Pair.from_arrays(grid, coupling_u, coupling_v),
        radial=Pair.from_arrays(grid, radial * u, np.zeros(grid.shape)),
    )


def _combine(terms: GradientTerms, weights: Tuple[float, float, float, float, float]) -> Pair:
    grid = terms.kinetic.grid
    parts = (terms.kinetic, terms.mass, terms.quasilinear, terms.coupling, terms.radial)
    u = sum(w * part.u.values for w, part in zip(weights, parts) if w)
    v = sum(w * part.v.values for w, part in zip(weights, parts) if w)
    return Pair.from_arrays(grid, u, v)


def _energy_weights(params: Params) -> Tuple[float, float, float, float, float]:
    return (1.0, 1.0, 1.0, -2.0 / params.p, 0.0)


def _constraint_weights(params: Params, paper_literal: bool) -> Tuple[float, float, float, float, float]:
    N, p = params.N, params.p
    return (N, N + 2.0, N + 2.0, -2.0 * (N + p) / p, 0.0 if paper_literal else 1.0)


def grad_I(p: Pair, params: Params, model: PotentialModel) -> Pair:
    """Exact gradient of the discrete energy"""
    return _combine(gradient_terms(p, params, model), _energy_weights(params))


def grad_G(p: Pair, params: Params, model: PotentialModel, paper_literal: bool = False) -> Pair:
    """Exact gradient of the discrete constraint functional"""
    return _combine(gradient_terms(p, params, model), _constraint_weights(params, paper_literal))


def gradients(
    p: Pair, params: Params, model: PotentialModel, paper_literal: bool = False
) -> Tuple[Pair, Pair]:
    """(grad I, grad G) sharing one pass over the difference operators"""
    terms = gradient_terms(p, params, model)
    return _combine(terms, _energy_weights(params)), _combine(terms, _constraint_weights(params, paper_literal))


def pairing(p: Pair, q: Pair) -> float:
    """Discrete L^2 pairing h^N * sum(p.u q.u + p.v q.v)"""
    return p.grid.cell_volume * float(np.sum(p.u.values * q.u.values + p.v.values * q.v.values))


def absolute_pairing(p: Pair, q: Pair) -> float:
    return p.grid.cell_volume * float(np.sum(np.abs(p.u.values * q.u.values) + np.abs(p.v.values * q.v.values)))


def pair_norm(p: Pair) -> float:
    return float(np.sqrt(pairing(p, p)))
