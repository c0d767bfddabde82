"""Fibering map h(t) = I(u_t, v_t) along u_t(x) = t u(x/t), its maximizer and projection onto G = 0.

For a pair p with coefficients

    a = int(|grad u|^2 + |grad v|^2)
    b(t) = int(A(t x) u^2) + int(B v^2 + u^2 |grad u|^2 + v^2 |grad v|^2)
    c = int |u|^alpha |v|^beta

the map is h(t) = (a/2) t^N + (b(t)/2) t^(N+2) - (2c/p) t^(N+p), and
G(u_t, v_t) = t h'(t).
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy import optimize

from app.config.logging import get_logger
from app.core.exceptions import FiberingError, ValidationError
from app.models.enums import DEFAULT_T_RANGE
from app.models.requests import Params
from app.models.responses import FiberScanRow
from app.numerics.functional import breakdown, constraint_G, constraint_scale
from app.numerics.grid import Pair, scale_pair
from app.numerics.potential import PotentialModel

logger = get_logger(__name__)

BISECTION_RTOL = 1e-12
REFINE_WIDTH = 1e-2
REFINE_EXPANSIONS = 6


@dataclass(frozen=True)
class FiberCoefficients:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ValidationError(f"Fiber coefficients must be nonnegative, got {self}")

    def as_dict(self):
        return {"a": self.a, "b": self.b, "c": self.c}


class FiberMap:
    """h and h' for one pair; closed form for constant A, re-sampled A(t x) otherwise"""

    def __init__(
        self,
        params: Params,
        coefficients: FiberCoefficients,
        pair: Optional[Pair] = None,
        model: Optional[PotentialModel] = None,
        paper_literal: bool = False,
    ):
        self.params = params
        self.coefficients = coefficients
        self.pair = pair
        self.model = model
        self.paper_literal = paper_literal
        self._u_squared = None
        self._b_rest = coefficients.b
        if pair is not None and model is not None and not model.is_constant and not paper_literal:
            A, _ = model.on_grid(pair.grid)
            w = pair.grid.cell_volume
            self._u_squared = pair.u.values ** 2
            self._b_rest = coefficients.b - w * float(np.sum(A * self._u_squared))

    @classmethod
    def from_pair(
        cls, p: Pair, params: Params, model: PotentialModel, paper_literal: bool = False
    ) -> "FiberMap":
        b = breakdown(p, params, model)
        coefficients = FiberCoefficients(
            a=2.0 * b.kinetic, b=2.0 * (b.mass + b.quasilinear), c=b.coupling
        )
        return cls(params, coefficients, pair=p, model=model, paper_literal=paper_literal)

    @classmethod
    def from_coefficients(cls, params: Params, a: float, b: float, c: float) -> "FiberMap":
        return cls(params, FiberCoefficients(a, b, c))

    @property
    def is_closed_form(self) -> bool:
        return self._u_squared is None

    def _check_t(self, t: float) -> None:
        if not t > 0:
            raise ValidationError(f"Scaling parameter must be positive, got {t}")

    def _potential_terms(self, t: float) -> Tuple[float, float]:
        """int A(t x) u^2 and int (grad A)(t x) . (t x) u^2"""
        A, radial = self.model.on_grid(self.pair.grid, t)
        w = self.pair.grid.cell_volume
        return w * float(np.sum(A * self._u_squared)), w * float(np.sum(radial * self._u_squared))

    def b_of_t(self, t: float) -> float:
        if self.is_closed_form:
            return self.coefficients.b
        return self._b_rest + self._potential_terms(t)[0]

    def h(self, t: float) -> float:
        self._check_t(t)
        N, p = self.params.N, self.params.p
        a, c = self.coefficients.a, self.coefficients.c
        return 0.5 * a * t ** N + 0.5 * self.b_of_t(t) * t ** (N + 2) - (2.0 * c / p) * t ** (N + p)

    def h_prime(self, t: float) -> float:
        self._check_t(t)
        N, p = self.params.N, self.params.p
        a, c = self.coefficients.a, self.coefficients.c
        if self.is_closed_form:
            b, correction = self.coefficients.b, 0.0
        else:
            mass_A, radial = self._potential_terms(t)
            b = self._b_rest + mass_A
            correction = 0.5 * t ** (N + 1) * radial
        return (
            0.5 * N * a * t ** (N - 1)
            + 0.5 * (N + 2) * b * t ** (N + 1)
            + correction
            - (2.0 * c * (N + p) / p) * t ** (N + p - 1)
        )

    def scan(self, ts: Iterable[float], regrid: bool = False) -> List[FiberScanRow]:
        """Rows (t, h, h', G(u_t, v_t)); regrid evaluates G on the interpolated grid pair"""
        rows = []
        for t in ts:
            t = float(t)
            h_prime = self.h_prime(t)
            if regrid and self.pair is not None:
                G = constraint_G(scale_pair(self.pair, t), self.params, self.model, self.paper_literal)
            else:
                G = t * h_prime
            rows.append(FiberScanRow(t=t, h=self.h(t), h_prime=h_prime, G=G))
        return rows

    def sign_changes(self, ts: Iterable[float]) -> int:
        signs = [np.sign(self.h_prime(float(t))) for t in ts]
        signs = [s for s in signs if s != 0]
        return int(sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 != s1))

    def sigma_concavity_defect(self, sigmas: Iterable[float]) -> float:
        """Largest normalized chord excess of sigma -> h(sigma^{1/(N+p)}); <= 0 when concave"""
        sigmas = np.sort(np.asarray(list(sigmas), dtype=np.float64))
        if sigmas.size < 3:
            raise ValidationError("Concavity test needs at least three sigma values")
        exponent = 1.0 / (self.params.N + self.params.p)
        phi = np.array([self.h(s ** exponent) for s in sigmas])
        s0, s1, s2 = sigmas[:-2], sigmas[1:-1], sigmas[2:]
        chord = phi[:-2] + (phi[2:] - phi[:-2]) * (s1 - s0) / (s2 - s0)
        return float(np.max((chord - phi[1:-1]) / (1.0 + np.abs(phi[1:-1]))))

    def find_tbar(self, t_range: Tuple[float, float] = DEFAULT_T_RANGE) -> float:
        """Unique zero of h' by exponential bracketing from t = 1, then bisection"""
        if not self.coefficients.c > 0:
            raise FiberingError("Coupling integral is zero: the fibering map has no maximum")
        t_min, t_max = t_range
        value = self.h_prime(1.0)
        if value == 0.0:
            return 1.0
        lo = hi = 1.0
        if value > 0:
            while self.h_prime(hi) > 0:
                lo, hi = hi, hi * 2.0
                if hi > t_max:
                    raise FiberingError(f"h' stays positive up to t={t_max:g}")
        else:
            while self.h_prime(lo) < 0:
                lo, hi = lo / 2.0, lo
                if lo < t_min:
                    raise FiberingError(f"h' stays negative down to t={t_min:g}")
        if self.h_prime(hi) == 0.0:
            return hi
        return float(optimize.bisect(self.h_prime, lo, hi, xtol=1e-300, rtol=BISECTION_RTOL, maxiter=500))


def h(p: Pair, params: Params, model: PotentialModel, t: float, paper_literal: bool = False) -> float:
    return FiberMap.from_pair(p, params, model, paper_literal).h(t)


def h_prime(p: Pair, params: Params, model: PotentialModel, t: float, paper_literal: bool = False) -> float:
    return FiberMap.from_pair(p, params, model, paper_literal).h_prime(t)


def find_tbar(p: Pair, params: Params, model: PotentialModel, paper_literal: bool = False) -> float:
    return FiberMap.from_pair(p, params, model, paper_literal).find_tbar()


def project_with_scale(
    p: Pair,
    params: Params,
    model: PotentialModel,
    constraint_tol: float = 1e-6,
    paper_literal: bool = False,
) -> Tuple[Pair, float]:
    """Scale p onto G = 0; returns the projected pair and the scale used"""
    G = constraint_G(p, params, model, paper_literal)
    scale = constraint_scale(p, params, model, paper_literal)
    if abs(G) <= constraint_tol * scale:
        return p, 1.0

    tbar = FiberMap.from_pair(p, params, model, paper_literal).find_tbar()
    q = scale_pair(p, tbar)
    G_q = constraint_G(q, params, model, paper_literal)
    if abs(G_q) <= constraint_tol * constraint_scale(q, params, model, paper_literal):
        logger.debug(f"Projected onto G=0 at tbar={tbar:.12g}")
        return q, tbar

    # tbar is exact for the semi-analytic map; interpolation shifts the grid root slightly
    def residual(t: float) -> float:
        return constraint_G(scale_pair(p, t), params, model, paper_literal)

    width = REFINE_WIDTH
    for _ in range(REFINE_EXPANSIONS):
        lo, hi = tbar * (1.0 - width), tbar * (1.0 + width)
        g_lo, g_hi = residual(lo), residual(hi)
        if g_lo > 0 > g_hi:
            break
        width = min(4.0 * width, 0.9)
    else:
        raise FiberingError(f"Could not bracket the grid root of G around t={tbar:.6g}")

    t_star = float(optimize.brentq(residual, lo, hi, xtol=1e-300, rtol=BISECTION_RTOL, maxiter=200))
    q = scale_pair(p, t_star)
    G_q = constraint_G(q, params, model, paper_literal)
    scale_q = constraint_scale(q, params, model, paper_literal)
    if abs(G_q) > constraint_tol * scale_q:
        raise FiberingError(
            f"Projection left |G|={abs(G_q):.3e} above {constraint_tol:g} x scale {scale_q:.3e}"
        )
    logger.debug(f"Projected onto G=0 with tbar={tbar:.12g}, t*={t_star:.12g}")
    return q, t_star


def project_to_M(
    p: Pair,
    params: Params,
    model: PotentialModel,
    constraint_tol: float = 1e-6,
    paper_literal: bool = False,
) -> Pair:
    return project_with_scale(p, params, model, constraint_tol, paper_literal)[0]


def log_grid(t_min: float, t_max: float, points: int) -> np.ndarray:
    if not (0 < t_min < t_max) or points < 2:
        raise ValidationError("log grid needs 0 < t_min < t_max and at least two points")
    return np.geomspace(t_min, t_max, points)


def is_unimodal(fiber: FiberMap, t_range: Tuple[float, float] = DEFAULT_T_RANGE, points: int = 400) -> bool:
    return fiber.sign_changes(log_grid(t_range[0], t_range[1], points)) == 1
