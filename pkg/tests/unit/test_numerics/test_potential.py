import math
import os

import numpy as np
import pytest

from app.core.exceptions import PotentialConditionError, ValidationError
from app.models.enums import CheckStatus
from app.numerics.grid import Field, Grid
from app.numerics.potential import (
    ConstantPotential,
    HarmonicPotential,
    RationalPotential,
    SampleSet,
    TabulatedPotential,
    check_conditions,
    eval_A,
    eval_radial_derivative,
    require_conditions,
)
from app.storage.fields import read_field, write_field


@pytest.fixture
def samples():
    return SampleSet.default(Grid(3, 4.0, 9))


def _status(report, condition):
    return next(r.status for r in report.results if r.condition == condition)


class TestPotentialModels:
    """Test evaluation of the potential families"""

    def test_constant_values(self):
        """Test that the constant model has no radial derivative"""
        model = ConstantPotential(1.5)

        assert eval_A(model, [1.0, 2.0, 3.0]) == 1.5
        assert eval_radial_derivative(model, [1.0, 2.0, 3.0]) == 0.0
        assert model.is_constant

    def test_non_positive_A0_rejected(self):
        """Test that A0 must be positive"""
        with pytest.raises(ValidationError):
            ConstantPotential(0.0)

    def test_rational_limits(self, rational_potential):
        """Test A(0) = A0 and A(x) -> A_inf"""
        assert eval_A(rational_potential, [0.0, 0.0, 0.0]) == pytest.approx(1.0)
        assert eval_A(rational_potential, [1e4, 0.0, 0.0]) == pytest.approx(2.0, rel=1e-6)

    def test_rational_rejects_inverted_bounds(self):
        """Test that A_inf below A0 is rejected"""
        with pytest.raises(ValidationError):
            RationalPotential(A0=2.0, A_inf=1.0)

    @pytest.mark.parametrize("model", [RationalPotential(1.0, 2.0, 1.5), HarmonicPotential(1.0, 0.3)])
    def test_radial_derivative_matches_finite_difference(self, model):
        """Test grad A(x) . x = d/dt A(t x) at t = 1"""
        x = np.array([0.7, 0.2, -0.3])
        eps = 1e-6
        expected = (eval_A(model, (1 + eps) * x) - eval_A(model, (1 - eps) * x)) / (2 * eps)

        assert eval_radial_derivative(model, x) == pytest.approx(expected, rel=1e-6)

    def test_harmonic_is_unbounded(self):
        """Test that a positive curvature has an infinite limit"""
        assert math.isinf(HarmonicPotential(1.0, 0.5).A_inf)
        assert HarmonicPotential(1.0, 0.0).A_inf == 1.0

    def test_tabulated_reproduces_nodes(self, rational_potential):
        """Test that the tabulated model is exact on its own nodes"""
        grid = Grid(3, 4.0, 17)
        table = Field.from_function(grid, rational_potential.evaluate)
        model = TabulatedPotential(table, A_inf=2.0)

        A, _ = model.on_grid(grid)

        assert np.allclose(A, table.values, atol=1e-12)
        assert model.A0 == pytest.approx(float(np.min(table.values)))

    def test_tabulated_outside_is_A_inf(self, rational_potential):
        """Test the value outside the table"""
        grid = Grid(3, 4.0, 9)
        model = TabulatedPotential(Field.from_function(grid, rational_potential.evaluate), A_inf=2.0)

        assert eval_A(model, [100.0, 0.0, 0.0]) == 2.0

    def test_tabulated_point_evaluation(self, rational_potential, temp_dir):
        """Test single-point A and grad A . x of a table read back from a QSSFIELD dump"""
        grid = Grid(3, 4.0, 17)
        path = write_field(
            os.path.join(temp_dir, "A.txt"), Field.from_function(grid, rational_potential.evaluate), "A"
        )
        table, _ = read_field(path)
        model = TabulatedPotential(table, A_inf=2.0)
        A, radial = model.on_grid(grid)
        node = (9, 6, 11)
        x = [float(grid.axis[k]) for k in node]

        assert eval_A(model, x) == pytest.approx(A[node], rel=1e-12)
        assert eval_radial_derivative(model, x) == pytest.approx(radial[node], rel=1e-12)
        assert eval_A(model, [0.25, 0.0, 0.0]) == pytest.approx(
            0.5 * (eval_A(rational_potential, [0.0, 0.0, 0.0]) + eval_A(rational_potential, [0.5, 0.0, 0.0]))
        )

    def test_tabulated_rejects_non_positive_table(self):
        """Test that the table must be positive"""
        with pytest.raises(ValidationError):
            TabulatedPotential(Field.zeros(Grid(3, 2.0, 5)), A_inf=1.0)

    def test_tabulated_gradient_count(self):
        """Test that N gradient tables are required when any are given"""
        grid = Grid(3, 2.0, 5)
        table = Field(grid, np.ones(grid.shape))

        with pytest.raises(ValidationError):
            TabulatedPotential(table, A_inf=1.0, gradients=[Field.zeros(grid)])

    def test_on_grid_caches_unit_scale(self, rational_potential):
        """Test that A on the grid is computed once for t = 1"""
        grid = Grid(3, 2.0, 5)

        first = rational_potential.on_grid(grid)
        second = rational_potential.on_grid(grid)
        scaled, _ = rational_potential.on_grid(grid, 2.0)

        assert first is second
        assert not first[0].flags.writeable
        assert scaled[grid.center_index, grid.center_index, grid.center_index] == pytest.approx(1.0)


class TestConditionChecks:
    """Test sampled verification of (A1)-(A4)"""

    def test_default_samples_reach_far_field(self):
        """Test that the sample set includes points far outside the box"""
        samples = SampleSet.default(Grid(3, 4.0, 9))

        assert samples.points.shape[1] == 3
        assert np.max(np.linalg.norm(samples.points, axis=1)) == pytest.approx(4000.0)
        assert samples.sigmas.min() == pytest.approx(1e-3)
        assert samples.sigmas.max() == pytest.approx(1e3)

    def test_constant_passes_everything(self, params, samples):
        """Test that a constant potential satisfies all conditions"""
        report = check_conditions(ConstantPotential(1.0), params, samples)

        assert report.passed
        assert [r.condition for r in report.results] == ["A1", "A2", "A3", "A4"]
        assert all(r.worst_margin >= 0 for r in report.results)

    def test_rational_bounds_and_radial_pass(self, params, samples, rational_potential):
        """Test (A1), (A2) and (A4) for the rational family"""
        report = check_conditions(rational_potential, params, samples)

        assert _status(report, "A1") == CheckStatus.PASS
        assert _status(report, "A2") == CheckStatus.PASS
        assert _status(report, "A4") == CheckStatus.PASS

    def test_harmonic_fails_bounds(self, params, samples):
        """Test that an unbounded potential fails (A1) with a reported violation"""
        report = check_conditions(HarmonicPotential(1.0, 1.0), params, samples)

        a1 = next(r for r in report.results if r.condition == "A1")
        assert a1.status == CheckStatus.FAIL
        assert a1.violation is not None
        assert "A1" in report.failed_conditions
        assert not report.passed

    def test_radial_condition_violation(self, samples):
        """Test that a steep rational potential breaks (A2) when alpha+beta is near 2"""
        from app.models.requests import Params

        steep = RationalPotential(A0=0.1, A_inf=10.0, length_scale=1.0)
        report = check_conditions(steep, Params(alpha=1.1, beta=1.1), samples)

        assert _status(report, "A2") == CheckStatus.FAIL

    def test_anisotropic_table_fails_rotation(self, params, samples):
        """Test that a table depending on y1 only breaks rotational invariance"""
        grid = Grid(3, 4.0, 9)
        table = Field.from_function(grid, lambda *x: 2.0 + np.tanh(x[0]))
        model = TabulatedPotential(table, A_inf=3.0)

        report = check_conditions(model, params, samples)

        assert _status(report, "A4") == CheckStatus.FAIL

    def test_require_conditions_raises(self, params, samples):
        """Test that failed conditions are named in the exception"""
        with pytest.raises(PotentialConditionError) as exc_info:
            require_conditions(HarmonicPotential(1.0, 1.0), params, samples)

        assert "A1" in exc_info.value.failed_conditions

    def test_sample_dimension_mismatch(self, params):
        """Test that samples must have N columns"""
        samples = SampleSet(points=np.zeros((4, 2)), sigmas=np.geomspace(1e-3, 1e3, 5))

        with pytest.raises(ValidationError):
            check_conditions(ConstantPotential(1.0), params, samples)
