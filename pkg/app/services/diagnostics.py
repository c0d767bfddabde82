import os
from typing import List, Optional, Tuple

import numpy as np

from app.config.settings import Settings
from app.core.exceptions import DiagnosticsError, PotentialConditionError, StorageError
from app.models.enums import (
    DECAY_MASS_THRESHOLD,
    DEFAULT_NODAL_EPS_FACTOR,
    DEFAULT_T_RANGE,
    CheckStatus,
    Component,
    SolveStatus,
)
from app.models.requests import RunConfig
from app.models.responses import (
    FIBER_SCAN_HEADER,
    GRADCHECK_HEADER,
    CheckResult,
    DiagnoseSummary,
    FiberScanRow,
    FiberScanSummary,
    GradcheckRow,
    GradcheckSummary,
    NodalReport,
    PotentialCheckReport,
    SolveSummary,
)
from app.numerics.fibering import FiberMap, log_grid
from app.numerics.functional import (
    absolute_pairing,
    constraint_G,
    constraint_scale,
    energy_I,
    grad_G,
    grad_I,
    pairing,
    pohozaev_P,
    pohozaev_scale,
    reduced_J,
)
from app.numerics.grid import Field, Grid, Pair, inner_mass_fraction
from app.numerics.nodal import default_eps, nodal_domains, nodal_sensitivity, weak_residual
from app.numerics.potential import PotentialModel, SampleSet, check_conditions
from app.numerics.symmetry import build_group, equivariance_defect, sign_change_fractions, symmetrize_pair
from app.services.base import BaseService
from app.services.solver import initial_seed
from app.storage.artifacts import read_json, write_csv, write_json
from app.storage.fields import read_field

SIGN_CHANGE_THRESHOLD = 0.99


def _upper_bound(name: str, value: float, threshold: float, detail: str = "") -> CheckResult:
    """PASS when value <= threshold"""
    passed = bool(np.isfinite(value) and value <= threshold)
    return CheckResult(
        name=name,
        status=CheckStatus.PASS if passed else CheckStatus.FAIL,
        value=float(value),
        threshold=float(threshold),
        margin=float(threshold - value),
        detail=detail,
    )


def _lower_bound(name: str, value: float, threshold: float, detail: str = "") -> CheckResult:
    """PASS when value >= threshold"""
    passed = bool(np.isfinite(value) and value >= threshold)
    return CheckResult(
        name=name,
        status=CheckStatus.PASS if passed else CheckStatus.FAIL,
        value=float(value),
        threshold=float(threshold),
        margin=float(value - threshold),
        detail=detail,
    )


def _advisory(check: CheckResult) -> CheckResult:
    """Downgrade a failed check to WARN; discretization-limited quantities do not fail a diagnosis"""
    if check.status == CheckStatus.FAIL:
        return check.model_copy(update={"status": CheckStatus.WARN})
    return check


def random_smooth_field(grid: Grid, rng: np.random.Generator, bumps: int = 3) -> Field:
    """Sum of Gaussian bumps with random centers, widths and signed amplitudes"""
    coords = grid.coordinates()
    values = np.zeros(grid.shape)
    for _ in range(bumps):
        center = rng.uniform(-grid.half_extent / 4, grid.half_extent / 4, size=grid.dims)
        width = rng.uniform(0.8, 2.0)
        amplitude = rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
        r2 = sum((x - c) ** 2 for x, c in zip(coords, center))
        values = values + amplitude * np.exp(-r2 / width ** 2)
    return Field(grid, values)


def random_smooth_pair(grid: Grid, rng: np.random.Generator) -> Pair:
    return Pair(random_smooth_field(grid, rng), random_smooth_field(grid, rng))


class DiagnosticsService(BaseService):
    """Condition checks, gradient audits, fibering scans and re-verification of solve reports"""

    def __init__(self, settings: Settings, output_dir: Optional[str] = None):
        super().__init__(settings, output_dir)

    def check_potential(self, run: RunConfig, model: PotentialModel, grid: Grid) -> PotentialCheckReport:
        """Sampled (A1)-(A4) report; raises after writing when any condition fails"""
        report = check_conditions(model, run.params, SampleSet.default(grid))
        document = {"config": run.model_dump(mode="json"), **report.model_dump(mode="json")}
        write_json(self.output_path("potential_check.json"), document)
        for r in report.results:
            self.logger.info(f"({r.condition}) {r.status.value}: worst margin {r.worst_margin:.6g}")
        if not report.passed:
            failed = report.failed_conditions
            raise PotentialConditionError(
                "Potential violates condition(s) " + ", ".join(f"({name})" for name in failed),
                failed_conditions=failed,
            )
        return report

    def nodal_count(self, run: RunConfig, path: str, eps_factor: Optional[float] = None) -> NodalReport:
        field, component = read_field(path)
        eps = default_eps(field, eps_factor or run.nodal_count.eps_factor)
        try:
            component_enum = Component(component)
        except ValueError:
            component_enum = None
        report = nodal_domains(field, eps, component_enum)
        sensitivity = nodal_sensitivity(field, eps)
        write_json(
            self.output_path("nodal_report.json"),
            {
                "config": run.model_dump(mode="json"),
                "field": os.path.basename(path),
                "report": report.model_dump(mode="json"),
                "sensitivity": sensitivity.model_dump(mode="json"),
            },
        )
        self.logger.info(
            f"Nodal domains of {component}: {report.positive_domains} positive, "
            f"{report.negative_domains} negative (eps={eps:.3e})"
        )
        return report

    def gradcheck(self, run: RunConfig, model: PotentialModel, grid: Grid) -> Tuple[List[GradcheckRow], GradcheckSummary]:
        """Central finite differences of I and G against the exact discrete gradients"""
        options = run.gradcheck
        params = run.params
        literal = run.paper_literal_G
        rng = np.random.default_rng(options.random_seed)
        eps = options.epsilon

        def energy(q: Pair) -> float:
            return energy_I(q, params, model)

        def constraint(q: Pair) -> float:
            return constraint_G(q, params, model, literal)

        rows = []
        for sample in range(options.samples):
            p = random_smooth_pair(grid, rng)
            direction = random_smooth_pair(grid, rng)
            for name, fn, gradient in (
                ("I", energy, grad_I(p, params, model)),
                ("G", constraint, grad_G(p, params, model, literal)),
            ):
                fd = (fn(p + direction * eps) - fn(p - direction * eps)) / (2.0 * eps)
                analytic = pairing(gradient, direction)
                scale = max(absolute_pairing(gradient, direction), np.finfo(float).tiny)
                error = abs(fd - analytic) / scale
                rows.append(
                    GradcheckRow(
                        sample=sample,
                        functional=name,
                        finite_difference=fd,
                        analytic=analytic,
                        relative_error=error,
                        status=CheckStatus.PASS if error <= options.tolerance else CheckStatus.FAIL,
                    )
                )

        failures = sum(1 for r in rows if r.status == CheckStatus.FAIL)
        summary = GradcheckSummary(
            config=run.model_dump(mode="json"),
            samples=options.samples,
            tolerance=options.tolerance,
            max_relative_error=max(r.relative_error for r in rows),
            failures=failures,
        )
        write_csv(self.output_path("gradcheck.csv"), GRADCHECK_HEADER, (r.as_row() for r in rows))
        write_json(self.output_path("gradcheck.json"), summary.model_dump(mode="json"))
        self.logger.info(
            f"Gradient audit: max relative error {summary.max_relative_error:.3e} over {len(rows)} checks"
        )
        if failures:
            raise DiagnosticsError(
                f"Gradient audit failed in {failures} of {len(rows)} checks "
                f"(max relative error {summary.max_relative_error:.3e} > {options.tolerance:g})"
            )
        return rows, summary

    def fiber_scan(
        self, run: RunConfig, model: PotentialModel, grid: Grid, pair: Optional[Pair] = None
    ) -> Tuple[List[FiberScanRow], FiberScanSummary]:
        """h, h' and G(u_t, v_t) along the scaling orbit of the symmetrized seed"""
        options = run.fiber_scan
        if pair is None:
            group = build_group(run.solver.s)
            pair = symmetrize_pair(initial_seed(run.solver, run.params, grid), group)
        fiber = FiberMap.from_pair(pair, run.params, model, run.paper_literal_G)
        rows = fiber.scan(log_grid(options.t_min, options.t_max, options.points), regrid=options.regrid)
        summary = FiberScanSummary(
            config=run.model_dump(mode="json"),
            coefficients=fiber.coefficients.as_dict(),
            tbar=fiber.find_tbar(),
            sign_changes=fiber.sign_changes(log_grid(*DEFAULT_T_RANGE, 400)),
            sigma_concavity_defect=fiber.sigma_concavity_defect(np.geomspace(1e-3, 1e3, 121)),
        )
        write_csv(self.output_path("fiber_scan.csv"), FIBER_SCAN_HEADER, (r.as_row() for r in rows))
        write_json(self.output_path("fiber_scan.json"), summary.model_dump(mode="json"))
        self.logger.info(f"Fibering map: tbar={summary.tbar:.12g}, {summary.sign_changes} sign change(s) of h'")
        return rows, summary

    def load_report(self, report_path: str) -> SolveSummary:
        data = read_json(report_path)
        try:
            return SolveSummary.model_validate(data)
        except ValueError as e:
            raise StorageError(f"{report_path} is not a solve report: {e}")

    def diagnose(
        self, summary: SolveSummary, report_path: str, run: RunConfig, model: PotentialModel
    ) -> DiagnoseSummary:
        """Re-verify the best run of a solve report from fresh evaluations

        Raises:
            DiagnosticsError: If the report holds no converged run or any check fails
        """
        if summary.best_run is None:
            statuses = ", ".join(r.status.value for r in summary.runs)
            raise DiagnosticsError(f"Report holds no converged run ({statuses})")
        best = summary.runs[summary.best_run]
        if best.status != SolveStatus.CONVERGED or not best.fields:
            raise DiagnosticsError(f"Best run has status {best.status.value}; expected converged")

        directory = os.path.dirname(report_path) or "."
        u, _ = read_field(os.path.join(directory, best.fields[Component.U.value]))
        v, _ = read_field(os.path.join(directory, best.fields[Component.V.value]))
        pair = Pair(u, v)

        params, options = run.params, run.diagnose
        literal = run.paper_literal_G
        group = build_group(run.solver.s)
        consistency = options.consistency_tol

        I = energy_I(pair, params, model)
        G = constraint_G(pair, params, model, literal)
        G_scale = constraint_scale(pair, params, model, literal)
        G_full = constraint_G(pair, params, model)
        P = pohozaev_P(pair, params, model)
        P_scale = pohozaev_scale(pair, params, model)
        J = reduced_J(pair, params, model)
        defect = equivariance_defect(pair, group)
        defect_tol = (
            options.equivariance_tol if group.is_exact_on_lattice else options.interpolated_equivariance_tol
        )

        checks = [
            _upper_bound("m_estimate_consistency", abs(I - best.m_estimate), consistency * (1 + abs(I)),
                         f"recomputed I={I:.12g}, reported {best.m_estimate:.12g}"),
            _lower_bound("m_positive", I, np.nextafter(0.0, 1.0)),
            _upper_bound("constraint_residual", abs(G), run.solver.constraint_tol * G_scale,
                         f"|G| against {run.solver.constraint_tol:g} x scale {G_scale:.6g}"),
            _upper_bound("constraint_consistency", abs(abs(G) - best.constraint_residual),
                         consistency * (1 + G_scale)),
            _upper_bound("pohozaev_relative", abs(P) / P_scale if P_scale > 0 else 0.0, options.pohozaev_tol),
            _upper_bound("equivariance_defect", defect, defect_tol),
            _upper_bound("equivariance_consistency", abs(defect - best.equivariance_defect), consistency),
            _lower_bound("J_positive", J, np.nextafter(0.0, 1.0)),
            _upper_bound("reduced_identity", abs(J - (I - G_full / (params.N + params.p))), 1e-12 * (1 + abs(I))),
            _advisory(_upper_bound("weak_residual", weak_residual(pair, params, model), options.residual_tol,
                                   "L2 norm of grad I relative to the L2 norm of the pair")),
        ]

        required = 2 * run.solver.s
        reported = {Component.U: best.nodal_count_u, Component.V: best.nodal_count_v}
        for component, f in ((Component.U, u), (Component.V, v)):
            name = component.value
            total = nodal_domains(f, default_eps(f, options.eps_factor)).total
            checks.append(_lower_bound(f"nodal_{name}", total, required, f"at least 2s={required} domains"))
            recount = nodal_domains(f, default_eps(f, DEFAULT_NODAL_EPS_FACTOR)).total
            checks.append(_upper_bound(f"nodal_{name}_consistency", abs(recount - reported[component]), 0))
            checks.append(_advisory(_lower_bound(f"decay_{name}", inner_mass_fraction(f), DECAY_MASS_THRESHOLD,
                                                 "share of the L2 mass inside the inner half-box")))
            fractions = sign_change_fractions(f, group, default_eps(f, options.eps_factor))
            worst = min(fractions.values()) if fractions else 0.0
            checks.append(_lower_bound(f"sign_change_{name}", worst, SIGN_CHANGE_THRESHOLD,
                                       "smallest share of sign flips across a mirror line"))

        result = DiagnoseSummary(config=run.model_dump(mode="json"), report_path=report_path, checks=checks)
        write_json(self.output_path("diagnose.json"), result.model_dump(mode="json"))
        for check in checks:
            self.logger.info(
                f"{check.name}: {check.status.value} (value {self.format_quantity(check.value)}, "
                f"margin {self.format_quantity(check.margin)})"
            )
        if result.warned_checks:
            self.logger.warning("Advisory checks out of range: " + ", ".join(result.warned_checks))
        if not result.passed:
            raise DiagnosticsError("Diagnosis failed: " + ", ".join(result.failed_checks))
        return result
