import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import ValidationError
from app.models.enums import Component
from app.models.responses import NodalReport
from app.numerics.grid import Field, Grid, Pair
from app.numerics.nodal import default_eps, nodal_domains, nodal_sensitivity, weak_residual
from tests.conftest import angular_gaussian


class TestNodalDomains:
    """Test counting of connected sign regions"""

    @pytest.mark.parametrize("s,expected", [(2, 4), (3, 6)])
    def test_angular_seed_domains(self, s, expected):
        """Test that sin(s theta) Gaussians have 2s nodal domains"""
        field = angular_gaussian(Grid(3, 4.0, 33), s=s)

        report = nodal_domains(field, component=Component.U)

        assert report.positive_domains == s
        assert report.negative_domains == s
        assert report.total == expected
        assert report.component == Component.U

    def test_single_sign_field(self):
        """Test that a positive bump has one domain"""
        grid = Grid(3, 4.0, 17)
        field = Field.from_function(grid, lambda *x: np.exp(-sum(c ** 2 for c in x)))

        report = nodal_domains(field)

        assert (report.positive_domains, report.negative_domains) == (1, 0)

    def test_diagonal_contact_is_not_adjacent(self):
        """Test face adjacency: nodes touching at a corner are separate domains"""
        grid = Grid(3, 2.0, 5)
        values = np.zeros(grid.shape)
        values[1, 1, 2] = 1.0
        values[2, 2, 2] = 1.0

        assert nodal_domains(Field(grid, values), eps=0.5).positive_domains == 2

    def test_zero_field(self):
        """Test that a null field has no domains and a positive default threshold"""
        field = Field.zeros(Grid(3, 2.0, 5))

        assert default_eps(field) > 0
        assert nodal_domains(field).total == 0

    def test_non_positive_threshold_rejected(self):
        """Test that eps must be positive"""
        with pytest.raises(ValidationError):
            nodal_domains(Field.zeros(Grid(3, 2.0, 5)), eps=0.0)

    def test_sensitivity(self):
        """Test totals at eps and one decade above"""
        field = angular_gaussian(Grid(3, 4.0, 33))

        sensitivity = nodal_sensitivity(field)

        assert sensitivity.total_at_eps == 4
        assert sensitivity.total_at_decade == 4

    def test_report_total_is_validated(self):
        """Test that total must equal the sum of both counts"""
        with pytest.raises(PydanticValidationError):
            NodalReport(threshold=1e-3, positive_domains=2, negative_domains=2, total=3)


class TestWeakResidual:
    """Test the normalized residual of the Euler-Lagrange system"""

    def test_zero_pair(self, params, constant_potential):
        """Test that the residual of the null pair is zero"""
        assert weak_residual(Pair.zeros(Grid(3, 2.0, 5)), params, constant_potential) == 0.0

    def test_seed_is_not_critical(self, seed_pair, params, constant_potential):
        """Test that an arbitrary pair has a clearly positive residual"""
        assert weak_residual(seed_pair, params, constant_potential) > 1e-3


class TestSignEquivariance:
    """Property checks of nodal counts"""

    FIELD = angular_gaussian(Grid(3, 4.0, 17), s=3)

    @given(scale=st.floats(min_value=1e-3, max_value=1e3))
    @settings(deadline=None, max_examples=20)
    def test_negation_swaps_counts(self, scale):
        """Test that -c f swaps positive and negative domains and c > 0 changes nothing"""
        f = self.FIELD * scale
        eps = default_eps(f)

        report = nodal_domains(f, eps)
        flipped = nodal_domains(-f, eps)

        assert (flipped.positive_domains, flipped.negative_domains) == (
            report.negative_domains,
            report.positive_domains,
        )
        assert report.total == nodal_domains(self.FIELD).total
