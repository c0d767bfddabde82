import concurrent.futures
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft, optimize

from app.config.settings import Settings
from app.core.exceptions import (
    CouplingCollapseError,
    FiberingError,
    NonConvergenceError,
    SolveError,
    ValidationError,
)
from app.models.enums import (
    DECAY_MASS_THRESHOLD,
    DEFAULT_NODAL_EPS_FACTOR,
    STEP_STOP_GRADIENT_FACTOR,
    Component,
    Descent,
    FieldFormat,
    Preconditioner,
    SeedShape,
    SolveStatus,
    StopReason,
)
from app.models.requests import Params, RunConfig, SolverConfig
from app.models.responses import (
    TRACE_HEADER,
    MEstimate,
    SolveReportModel,
    SolveSummary,
    TraceRow,
)
from app.numerics.fibering import find_tbar, project_with_scale
from app.numerics.functional import (
    constraint_G,
    constraint_scale,
    coupling,
    energy_I,
    gradients,
    pair_norm,
    pairing,
    pohozaev_P,
    pohozaev_scale,
)
from app.numerics.grid import Field, Grid, Pair, distance_X, inner_mass_fraction
from app.numerics.nodal import default_eps, nodal_domains
from app.numerics.potential import PotentialModel
from app.numerics.symmetry import DihedralGroup, build_group, equivariance_defect, symmetrize_pair
from app.services.base import BaseService
from app.storage.artifacts import write_csv, write_json, write_sign_slice
from app.storage.fields import field_path, write_field

SEED_SCALE_FACTOR = 1.25
SEED_SCALE_STEPS = 40
SEED_SCALE_RTOL = 1e-12
# amplitude / width ratios tried before the bounded refinement
SEED_RATIOS = np.geomspace(0.1, 100.0, 13)
SEED_RATIO_XATOL = 1e-2


@dataclass(frozen=True)
class SolveReport:
    """Terminal state of one minimization run"""

    final_pair: Pair
    status: SolveStatus
    m_estimate: float
    constraint_residual: float
    constraint_scale: float
    pohozaev_residual: float
    pohozaev_scale: float
    grad_norm: float
    equivariance_defect: float
    coupling: float
    nodal_count_u: int
    nodal_count_v: int
    iterations: int
    trace: Tuple[TraceRow, ...]
    seed_widths: Tuple[float, float]
    stop_reason: Optional[StopReason] = None
    message: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.status == SolveStatus.CONVERGED

    @property
    def pohozaev_relative(self) -> float:
        return self.pohozaev_residual / self.pohozaev_scale if self.pohozaev_scale > 0 else 0.0

    def to_model(self, fields: Optional[dict] = None, trace_file: Optional[str] = None) -> SolveReportModel:
        return SolveReportModel(
            status=self.status,
            stop_reason=self.stop_reason,
            message=self.message,
            seed_widths=list(self.seed_widths),
            m_estimate=self.m_estimate,
            constraint_residual=self.constraint_residual,
            constraint_scale=self.constraint_scale,
            pohozaev_residual=self.pohozaev_residual,
            pohozaev_relative=self.pohozaev_relative,
            grad_norm=self.grad_norm,
            equivariance_defect=self.equivariance_defect,
            coupling=self.coupling,
            nodal_count_u=self.nodal_count_u,
            nodal_count_v=self.nodal_count_v,
            iterations=self.iterations,
            fields=fields or {},
            trace_file=trace_file,
        )


class H1Preconditioner:
    """(1 - Laplacian_h)^{-1} with zero ghost values, diagonalized by the type-I sine transform"""

    def __init__(self, grid: Grid):
        n, h = grid.points_per_axis, grid.spacing
        j = np.arange(n)
        eigenvalues = (4.0 / h ** 2) * np.sin(np.pi * (j + 1) / (2.0 * (n + 1))) ** 2
        denominator = np.ones(grid.shape)
        for k in range(grid.dims):
            denominator = denominator + eigenvalues.reshape([-1 if i == k else 1 for i in range(grid.dims)])
        self.denominator = denominator

    def apply(self, values: np.ndarray) -> np.ndarray:
        return fft.idstn(fft.dstn(values, type=1) / self.denominator, type=1)

    def apply_pair(self, p: Pair) -> Pair:
        return Pair.from_arrays(p.grid, self.apply(p.u.values), self.apply(p.v.values))

    def apply_inverse(self, values: np.ndarray) -> np.ndarray:
        return fft.idstn(fft.dstn(values, type=1) * self.denominator, type=1)

    def norm(self, p: Pair) -> float:
        """sqrt(<p, (1 - Laplacian_h) p>), the length of p in this metric"""
        image = Pair.from_arrays(p.grid, self.apply_inverse(p.u.values), self.apply_inverse(p.v.values))
        return math.sqrt(max(pairing(p, image), 0.0))


def seed_field(
    grid: Grid,
    s: int,
    width: float,
    amplitude: float,
    rotation: float,
    shape: SeedShape = SeedShape.HARMONIC,
) -> Field:
    """amplitude * exp(-|x|^2 / width^2) * sin(s (theta - rotation)), theta = atan2(y2, y1)

    The harmonic shape carries the extra factor (r / width)^s, r^2 = y1^2 + y2^2, which
    makes the angular part the polynomial Im((y1 + i y2)^s) and the seed smooth on the
    y3 axis. The sector shape has an unbounded gradient there.
    """
    coords = grid.coordinates()
    theta = np.arctan2(coords[1], coords[0])
    angular = np.sin(s * (theta - rotation))
    if shape == SeedShape.HARMONIC:
        angular = angular * ((coords[0] ** 2 + coords[1] ** 2) / width ** 2) ** (s / 2.0)
    radial = np.exp(-grid.radius_squared() / width ** 2)
    return Field(grid, np.broadcast_to(amplitude * radial * angular, grid.shape))


def initial_seed(
    config: SolverConfig,
    params: Params,
    grid: Grid,
    widths: Optional[Sequence[float]] = None,
    amplitude: Optional[float] = None,
) -> Pair:
    """Angular Gaussian pair sharing the sin(s theta) factor"""
    profile = config.seed_profile
    w_u, w_v = widths if widths is not None else (profile.width_u, profile.width_v)
    a = amplitude if amplitude is not None else (profile.amplitude or 1.0)
    seed = Pair(
        seed_field(grid, config.s, w_u, a, profile.rotation, profile.shape),
        seed_field(grid, config.s, w_v, a, profile.rotation, profile.shape),
    )
    value = coupling(seed, params)
    if value <= config.coupling_floor:
        raise CouplingCollapseError(
            f"Seed coupling {value:.3e} is at or below the floor {config.coupling_floor:g}", iteration=0
        )
    return seed


def seed_on_constraint(
    config: SolverConfig,
    params: Params,
    model: PotentialModel,
    grid: Grid,
    widths: Optional[Sequence[float]] = None,
    amplitude: Optional[float] = None,
    paper_literal: bool = False,
) -> Tuple[Pair, float]:
    """Scale the analytic seed until G = 0 holds on the grid

    u(x) -> t u(x / t) maps the seed with (amplitude, widths) to the seed with
    (t amplitude, t widths), so every trial scale is rebuilt exactly instead of
    interpolated. The root taken is the first crossing of G from positive to
    negative, the maximum of I along the fiber.

    Returns:
        The seed on G = 0 and the scale t

    Raises:
        FiberingError: If no scale inside the box brings G below zero
    """
    profile = config.seed_profile
    w = np.asarray(widths if widths is not None else (profile.width_u, profile.width_v), dtype=float)
    a = amplitude if amplitude is not None else (profile.amplitude or 1.0)

    def build(t: float) -> Pair:
        return initial_seed(config, params, grid, tuple(t * w), t * a)

    def residual(t: float) -> float:
        return constraint_G(build(t), params, model, paper_literal)

    t = find_tbar(build(1.0), params, model, paper_literal) / SEED_SCALE_FACTOR ** 4
    g = residual(t)
    steps = 0
    while g <= 0:
        steps += 1
        if steps > SEED_SCALE_STEPS:
            raise FiberingError(f"G of the seed stays non-positive down to scale t={t:.3g}")
        t /= SEED_SCALE_FACTOR
        g = residual(t)
    while True:
        steps += 1
        if steps > SEED_SCALE_STEPS:
            raise FiberingError(
                f"No scale of the seed (amplitude {a:g}, widths {tuple(w)}) reaches G < 0 on the grid "
                f"up to t={t:.3g}; increase grid.half_extent or the seed amplitude"
            )
        upper = t * SEED_SCALE_FACTOR
        g_upper = residual(upper)
        if g_upper <= 0:
            break
        t = upper

    t_star = float(optimize.brentq(residual, t, upper, xtol=1e-300, rtol=SEED_SCALE_RTOL, maxiter=200))
    return build(t_star), t_star


def calibrate_amplitude(
    config: SolverConfig,
    params: Params,
    model: PotentialModel,
    grid: Grid,
    widths: Sequence[float],
    paper_literal: bool = False,
) -> float:
    """Amplitude whose seed on G = 0 has the lowest I

    Scaling along the fibers preserves amplitude / width, so that ratio is the
    shape parameter left free by the constraint. A coarse geometric scan picks
    the best ratio, a bounded scalar search refines it.

    Raises:
        FiberingError: If no ratio of the scan lands on G = 0
    """
    base = math.sqrt(widths[0] * widths[1])

    def energy(log_ratio: float) -> float:
        try:
            pair, _ = seed_on_constraint(
                config, params, model, grid, widths, base * math.exp(log_ratio), paper_literal
            )
        except (FiberingError, CouplingCollapseError):
            return math.inf
        return energy_I(pair, params, model)

    log_ratios = np.log(SEED_RATIOS)
    energies = np.array([energy(x) for x in log_ratios])
    finite = np.isfinite(energies)
    if not finite.any():
        raise FiberingError(
            f"No amplitude in [{SEED_RATIOS[0] * base:.3g}, {SEED_RATIOS[-1] * base:.3g}] puts the seed "
            f"with widths {tuple(widths)} on G = 0; increase grid.half_extent"
        )
    best = int(np.argmin(np.where(finite, energies, np.inf)))
    lo = log_ratios[max(best - 1, 0)]
    hi = log_ratios[min(best + 1, len(log_ratios) - 1)]
    # bounded Brent needs finite values; failed ratios lie outside the useful range anyway
    penalty = 10.0 * float(np.max(np.abs(energies[finite]))) + 1.0

    result = optimize.minimize_scalar(
        lambda x: min(energy(x), penalty),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": SEED_RATIO_XATOL},
    )
    log_ratio = float(result.x) if result.fun < energies[best] else float(log_ratios[best])
    return base * math.exp(log_ratio)


def estimate_m(reports: Sequence[SolveReport]) -> MEstimate:
    """Smallest converged energy and the relative spread over converged runs"""
    energies = [r.m_estimate for r in reports if r.converged]
    if not energies:
        raise NonConvergenceError("No converged run to estimate m from")
    m = min(energies)
    spread = (max(energies) - m) / abs(m) if m != 0 else 0.0
    return MEstimate(m=m, spread=spread, runs_converged=len(energies), runs_total=len(reports))


@dataclass
class _Iterate:
    pair: Pair
    energy: float


@dataclass
class _Gradient:
    """Tangent gradient data at one iterate"""

    g_I: Pair
    g_G: Pair
    normal: Pair
    direction: Pair
    slope: float
    norm: float

    def tangent(self, d: Pair) -> Pair:
        """Remove the component of d that changes G to first order"""
        denominator = pairing(self.g_G, self.normal)
        if denominator <= 0:
            return d
        return d - self.normal * (pairing(self.g_G, d) / denominator)


@dataclass
class _Context:
    config: SolverConfig
    params: Params
    model: PotentialModel
    group: DihedralGroup
    paper_literal: bool
    widths: Tuple[float, float]
    preconditioner: Optional[H1Preconditioner] = None
    trace: List[TraceRow] = field(default_factory=list)


class SolverService(BaseService):
    """Projected-gradient minimization of I over {G = 0} within the equivariant subspace"""

    def __init__(self, settings: Settings, output_dir: Optional[str] = None):
        super().__init__(settings, output_dir)

    def _project(self, ctx: _Context, p: Pair) -> Pair:
        q, _ = project_with_scale(
            p, ctx.params, ctx.model, ctx.config.constraint_tol, ctx.paper_literal
        )
        return q

    def _seed(self, ctx: _Context, grid: Grid) -> Pair:
        """Profile seed moved onto G = 0, with a calibrated amplitude unless one is fixed"""
        config, params, model = ctx.config, ctx.params, ctx.model
        profile = config.seed_profile
        # coupling floor is checked on the profile seed itself
        initial_seed(config, params, grid, ctx.widths)

        amplitude = profile.amplitude
        if amplitude is None:
            amplitude = calibrate_amplitude(config, params, model, grid, ctx.widths, ctx.paper_literal)
        seed, t = seed_on_constraint(config, params, model, grid, ctx.widths, amplitude, ctx.paper_literal)

        inner = min(inner_mass_fraction(seed.u), inner_mass_fraction(seed.v))
        self.logger.info(
            f"Seed on G=0: amplitude {self.format_quantity(t * amplitude)}, "
            f"widths ({self.format_quantity(t * ctx.widths[0])}, {self.format_quantity(t * ctx.widths[1])}), "
            f"I={self.format_quantity(energy_I(seed, params, model))}, "
            f"inner mass {self.format_quantity(inner)}"
        )
        if inner < profile.min_inner_mass:
            raise FiberingError(
                f"Seed on G = 0 keeps {inner:.3f} of its mass in the inner half-box, below "
                f"min_inner_mass={profile.min_inner_mass:g}; increase grid.half_extent"
            )
        if inner < DECAY_MASS_THRESHOLD:
            self.logger.warning(
                f"Seed inner half-box mass {inner:.3f} is below {DECAY_MASS_THRESHOLD:g}; "
                f"the box may truncate the solution"
            )
        return seed

    def _direction(self, ctx: _Context, p: Pair) -> _Gradient:
        """Steepest tangent direction in the solver metric and the relative dual norm of the gradient"""
        g_I, g_G = gradients(p, ctx.params, ctx.model, ctx.paper_literal)
        if ctx.preconditioner is None:
            pg, pq = g_I, g_G
            norm_p = pair_norm(p)
        else:
            pg = ctx.preconditioner.apply_pair(g_I)
            pq = ctx.preconditioner.apply_pair(g_G)
            norm_p = ctx.preconditioner.norm(p)
        qq = pairing(g_G, pq)
        mu = pairing(g_G, pg) / qq if qq > 0 else 0.0
        direction = pg - pq * mu
        slope = pairing(g_I, direction)
        grad_norm = math.sqrt(max(slope, 0.0)) / norm_p if norm_p > 0 else 0.0
        return _Gradient(g_I=g_I, g_G=g_G, normal=pq, direction=direction, slope=slope, norm=grad_norm)

    def _search_direction(
        self, ctx: _Context, grad: _Gradient, previous: Optional[_Gradient], last: Optional[Pair]
    ) -> Pair:
        """Polak-Ribiere+ direction in the solver metric, steepest when it is not a descent direction"""
        if ctx.config.descent == Descent.STEEPEST or previous is None or last is None:
            return grad.direction
        if previous.slope <= 0:
            return grad.direction
        beta = max(pairing(grad.g_I, grad.direction - previous.direction) / previous.slope, 0.0)
        if beta == 0.0:
            return grad.direction
        d = grad.tangent(grad.direction + last * beta)
        if pairing(grad.g_I, d) <= 0:
            return grad.direction
        return d

    def _line_search(self, ctx: _Context, current: _Iterate, direction: Pair, step: float):
        """First trial along -direction whose projection lowers I; None when the step underflows"""
        config = ctx.config
        while step >= config.min_step:
            trial = symmetrize_pair(current.pair - direction * step, ctx.group)
            try:
                candidate = self._project(ctx, trial)
            except FiberingError as e:
                self.logger.debug(f"Trial step {step:.3e} rejected: {e}")
                step *= config.shrink
                continue
            if coupling(candidate, ctx.params) <= config.coupling_floor:
                step *= config.shrink
                continue
            energy = energy_I(candidate, ctx.params, ctx.model)
            if energy < current.energy:
                return _Iterate(candidate, energy), step
            step *= config.shrink
        return None, step

    def _report(
        self,
        ctx: _Context,
        p: Pair,
        status: SolveStatus,
        iterations: int,
        grad_norm: float,
        stop_reason: Optional[StopReason] = None,
        message: Optional[str] = None,
    ) -> SolveReport:
        params, model = ctx.params, ctx.model
        return SolveReport(
            final_pair=p,
            status=status,
            m_estimate=energy_I(p, params, model),
            constraint_residual=abs(constraint_G(p, params, model, ctx.paper_literal)),
            constraint_scale=constraint_scale(p, params, model, ctx.paper_literal),
            pohozaev_residual=abs(pohozaev_P(p, params, model)),
            pohozaev_scale=pohozaev_scale(p, params, model),
            grad_norm=grad_norm,
            equivariance_defect=equivariance_defect(p, ctx.group),
            coupling=coupling(p, params),
            nodal_count_u=nodal_domains(p.u, default_eps(p.u, DEFAULT_NODAL_EPS_FACTOR)).total,
            nodal_count_v=nodal_domains(p.v, default_eps(p.v, DEFAULT_NODAL_EPS_FACTOR)).total,
            iterations=iterations,
            trace=tuple(ctx.trace),
            seed_widths=ctx.widths,
            stop_reason=stop_reason,
            message=message,
        )

    def _not_converged(
        self, ctx: _Context, p: Pair, iteration: int, grad_norm: float, stop: Optional[StopReason], message: str
    ) -> NonConvergenceError:
        return NonConvergenceError(
            message, iteration=iteration,
            report=self._report(ctx, p, SolveStatus.NON_CONVERGED, iteration, grad_norm, stop, message),
        )

    def minimize(
        self,
        config: SolverConfig,
        params: Params,
        model: PotentialModel,
        grid: Grid,
        paper_literal: bool = False,
        seed: Optional[Pair] = None,
        widths: Optional[Sequence[float]] = None,
    ) -> SolveReport:
        """Run the descent loop

        A run converges when the relative gradient norm drops below tol_grad, or when
        the d_X step drops below tol_dx while the gradient norm is within
        STEP_STOP_GRADIENT_FACTOR x tol_grad.

        Args:
            config: Solver settings
            params: Exponents, dimension and coupling constant
            model: Potential, assumed to pass the condition checks
            grid: Discretization grid
            paper_literal: Use the constraint without the grad A . x term
            seed: Optional starting pair; defaults to the profile seed placed on G = 0
            widths: Seed widths overriding config.seed_profile

        Returns:
            SolveReport of a converged run

        Raises:
            CouplingCollapseError: If the coupling integral falls to the floor
            FiberingError: If the initial pair cannot be scaled onto the constraint
            NonConvergenceError: If max_iter is reached, the line search is exhausted
                or the steps stagnate with a large gradient
        """
        profile = config.seed_profile
        w = tuple(float(x) for x in (widths or (profile.width_u, profile.width_v)))
        ctx = _Context(
            config=config,
            params=params,
            model=model,
            group=build_group(config.s),
            paper_literal=paper_literal,
            widths=w,
            preconditioner=H1Preconditioner(grid) if config.preconditioner == Preconditioner.H1 else None,
        )

        if seed is None:
            try:
                seed = self._seed(ctx, grid)
            except CouplingCollapseError as e:
                e.report = self._report(
                    ctx, Pair.zeros(grid), SolveStatus.COUPLING_COLLAPSE, 0, 0.0, message=str(e)
                )
                raise
            except FiberingError as e:
                e.report = self._report(
                    ctx, Pair.zeros(grid), SolveStatus.FIBERING_FAILURE, 0, 0.0, message=str(e)
                )
                raise
        if seed.grid != grid:
            raise ValidationError("Seed pair does not live on the solver grid")

        tol_dx = config.tol_dx or config.tol_dx_relative * (1.0 + distance_X(seed, Pair.zeros(grid)))
        self.logger.info(
            f"Starting minimization: s={config.s}, widths={w}, n={grid.points_per_axis}, "
            f"descent={config.descent.value}, tol_dx={tol_dx:.3e}"
        )

        p = symmetrize_pair(seed, ctx.group)
        value = coupling(p, params)
        if value <= config.coupling_floor:
            message = f"Coupling {value:.3e} at or below floor {config.coupling_floor:g} at iteration 0"
            raise CouplingCollapseError(
                message, iteration=0,
                report=self._report(ctx, p, SolveStatus.COUPLING_COLLAPSE, 0, 0.0, message=message),
            )
        try:
            p = self._project(ctx, p)
        except FiberingError as e:
            e.report = self._report(ctx, p, SolveStatus.FIBERING_FAILURE, 0, 0.0, message=str(e))
            raise

        current = _Iterate(p, energy_I(p, params, model))
        step = config.step0
        dx = 0.0
        iteration = 0
        previous: Optional[_Gradient] = None
        last: Optional[Pair] = None
        while True:
            value = coupling(current.pair, params)
            if value <= config.coupling_floor:
                message = f"Coupling {value:.3e} at or below floor at iteration {iteration}"
                raise CouplingCollapseError(
                    message, iteration=iteration,
                    report=self._report(
                        ctx, current.pair, SolveStatus.COUPLING_COLLAPSE, iteration, 0.0, message=message
                    ),
                )

            grad = self._direction(ctx, current.pair)
            G = constraint_G(current.pair, params, model, paper_literal)
            ctx.trace.append(TraceRow(iteration=iteration, I=current.energy, G=G, gradnorm=grad.norm, dx=dx))

            stop = None
            if grad.norm < config.tol_grad:
                stop = StopReason.GRADIENT
            elif iteration > 0 and dx < tol_dx:
                if grad.norm > STEP_STOP_GRADIENT_FACTOR * config.tol_grad:
                    raise self._not_converged(
                        ctx, current.pair, iteration, grad.norm, StopReason.STAGNATED,
                        f"Step {dx:.3e} fell below tol_dx={tol_dx:.3e} with gradient norm {grad.norm:.3e} "
                        f"above {STEP_STOP_GRADIENT_FACTOR:g} x tol_grad",
                    )
                stop = StopReason.STEP
            if stop is not None:
                self.logger.info(
                    f"Converged ({stop.value}) after {iteration} iterations, "
                    f"I={current.energy:.10g}, gradnorm={self.format_quantity(grad.norm)}"
                )
                return self._report(ctx, current.pair, SolveStatus.CONVERGED, iteration, grad.norm, stop)

            if iteration >= config.max_iter:
                raise self._not_converged(
                    ctx, current.pair, iteration, grad.norm, None,
                    f"No stopping criterion met within max_iter={config.max_iter}",
                )

            direction = self._search_direction(ctx, grad, previous, last)
            accepted, used_step = self._line_search(ctx, current, direction, step)
            if accepted is None and direction is not grad.direction:
                self.logger.debug(f"Restarting from the steepest direction at iteration {iteration}")
                direction = grad.direction
                accepted, used_step = self._line_search(ctx, current, direction, step)
            if accepted is None:
                message = (
                    f"Line search exhausted at iteration {iteration} (step {used_step:.3e} < "
                    f"min_step={config.min_step:g}) with gradient norm {grad.norm:.3e}"
                )
                self.logger.warning(message)
                raise self._not_converged(ctx, current.pair, iteration, grad.norm, StopReason.STALLED, message)

            dx = distance_X(accepted.pair, current.pair)
            current = accepted
            previous, last = grad, direction
            step = min(used_step / config.shrink, config.max_step)
            iteration += 1
            if iteration % 50 == 0:
                self.logger.debug(
                    f"iter {iteration}: I={current.energy:.10g} gradnorm={grad.norm:.3e} dx={dx:.3e}"
                )

    def _run_variant(self, index: int, config, params, model, grid, paper_literal, widths):
        try:
            return self.minimize(config, params, model, grid, paper_literal, widths=widths)
        except (SolveError, FiberingError) as e:
            self.logger.error(f"Run {index} failed: {e}")
            if e.report is None:
                raise
            return e.report

    def multistart(
        self,
        config: SolverConfig,
        params: Params,
        model: PotentialModel,
        grid: Grid,
        variants: Sequence[Sequence[float]],
        workers: int = 1,
        paper_literal: bool = False,
    ) -> List[SolveReport]:
        """Independent runs over seed-width variants; results keep variant order"""
        variants = [tuple(v) for v in variants] or [
            (config.seed_profile.width_u, config.seed_profile.width_v)
        ]
        max_workers = max(1, min(workers, len(variants)))
        self.logger.info(f"Starting {len(variants)} run(s) with {max_workers} worker(s)")

        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = [
                executor.submit(self._run_variant, i, config, params, model, grid, paper_literal, widths)
                for i, widths in enumerate(variants)
            ]
            reports = [future.result() for future in futures]

        converged = sum(1 for r in reports if r.converged)
        self.logger.info(f"Multistart completed: {converged}/{len(reports)} runs converged")
        return reports

    def solve_run(
        self,
        run: RunConfig,
        model: PotentialModel,
        grid: Grid,
        workers: int = 1,
        field_format: Optional[FieldFormat] = None,
    ) -> SolveSummary:
        """Multistart solve and artifact writing for the `solve` subcommand

        Raises:
            NonConvergenceError: If no run converged; artifacts are written first
        """
        fmt = field_format or self.default_field_format()
        reports = self.multistart(
            run.solver, run.params, model, grid, run.multistart.width_variants, workers, run.paper_literal_G
        )

        converged = [i for i, r in enumerate(reports) if r.converged]
        best = min(converged, key=lambda i: reports[i].m_estimate) if converged else 0
        models = []
        for i, report in enumerate(reports):
            trace_name = f"trace_{i}.csv"
            write_csv(self.output_path(trace_name), TRACE_HEADER, (row.as_row() for row in report.trace))
            fields = self._write_fields(report, fmt) if i == best else None
            models.append(report.to_model(fields=fields, trace_file=trace_name))
        write_csv(self.output_path("trace.csv"), TRACE_HEADER, (row.as_row() for row in reports[best].trace))

        summary = SolveSummary(
            config=run.model_dump(mode="json"),
            runs=models,
            best_run=best if converged else None,
            m=estimate_m(reports) if converged else None,
        )
        write_json(self.output_path("solve_report.json"), summary.model_dump(mode="json"))

        if not converged:
            statuses = ", ".join(r.status.value for r in reports)
            raise NonConvergenceError(f"No run converged ({statuses})", report=summary)
        self.logger.info(f"m estimate {summary.m.m:.10g} (spread {summary.m.spread:.3e})")
        return summary

    def _write_fields(self, report: SolveReport, fmt: FieldFormat) -> dict:
        fields = {}
        for component, f in ((Component.U, report.final_pair.u), (Component.V, report.final_pair.v)):
            path = write_field(
                field_path(self.output_dir, f"field_{component.value}", fmt), f, component.value, fmt
            )
            fields[component.value] = os.path.basename(path)
            write_sign_slice(self.output_path(f"{component.value}_slice.pgm"), f, default_eps(f))
        return fields
