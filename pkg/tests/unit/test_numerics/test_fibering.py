import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.exceptions import FiberingError, ValidationError
from app.models.requests import Params
from app.numerics.fibering import (
    FiberCoefficients,
    FiberMap,
    find_tbar,
    is_unimodal,
    log_grid,
    project_to_M,
    project_with_scale,
)
from app.numerics.functional import constraint_G, constraint_scale, energy_I
from app.numerics.grid import Field, Pair


@pytest.fixture
def closed_form(params):
    """a = b = 2, c = 1 for N = 3, p = 4: h'(t) = 3t^2 + 5t^4 - 3.5t^6"""
    return FiberMap.from_coefficients(params, 2.0, 2.0, 1.0)


class TestFiberMap:
    """Test the closed-form fibering map"""

    def test_tbar_closed_form(self, closed_form):
        """Test the maximizer against the root of 3 + 5s - 3.5s^2"""
        expected = math.sqrt((5.0 + math.sqrt(67.0)) / 7.0)

        assert closed_form.find_tbar() == pytest.approx(expected, rel=1e-10)

    def test_tbar_is_a_maximum(self, closed_form):
        """Test that h peaks at tbar"""
        tbar = closed_form.find_tbar()

        assert closed_form.h(tbar) > closed_form.h(0.9 * tbar)
        assert closed_form.h(tbar) > closed_form.h(1.1 * tbar)
        assert closed_form.h_prime(0.5 * tbar) > 0 > closed_form.h_prime(2.0 * tbar)

    @given(
        a=st.floats(min_value=1e-2, max_value=1e2),
        b=st.floats(min_value=1e-2, max_value=1e2),
        c=st.floats(min_value=1e-2, max_value=1e2),
    )
    @settings(deadline=None, max_examples=50)
    def test_unique_zero_of_h_prime(self, a, b, c):
        """Test one sign change of h' and h'(tbar) = 0 for positive coefficients"""
        params = Params()
        fiber = FiberMap.from_coefficients(params, a, b, c)
        tbar = fiber.find_tbar()

        assert is_unimodal(fiber)
        N = params.N
        scale = 0.5 * N * a * tbar ** (N - 1) + 0.5 * (N + 2) * b * tbar ** (N + 1)
        assert abs(fiber.h_prime(tbar)) <= 1e-8 * max(scale, 1.0)

    def test_sigma_concavity(self, closed_form):
        """Test that sigma -> h(sigma^{1/(N+p)}) is concave"""
        assert closed_form.sigma_concavity_defect(np.geomspace(1e-3, 1e3, 121)) <= 1e-12

    def test_zero_coupling_has_no_maximum(self, params):
        """Test that c = 0 is reported as a fibering failure"""
        with pytest.raises(FiberingError):
            FiberMap.from_coefficients(params, 1.0, 1.0, 0.0).find_tbar()

    def test_maximizer_beyond_range(self, params):
        """Test that a maximizer outside the search range is reported"""
        with pytest.raises(FiberingError):
            FiberMap.from_coefficients(params, 1.0, 1.0, 1e-30).find_tbar()

    def test_negative_coefficients_rejected(self):
        """Test that fiber coefficients are nonnegative"""
        with pytest.raises(ValidationError):
            FiberCoefficients(-1.0, 1.0, 1.0)

    def test_non_positive_t_rejected(self, closed_form):
        """Test that h is defined for t > 0 only"""
        with pytest.raises(ValidationError):
            closed_form.h(0.0)

    def test_scan_without_regrid(self, closed_form):
        """Test that scan rows carry G = t h'(t)"""
        rows = closed_form.scan(log_grid(0.1, 3.0, 7))

        assert len(rows) == 7
        for row in rows:
            assert row.G == pytest.approx(row.t * row.h_prime)

    def test_log_grid_validation(self):
        """Test that the scan range must be increasing and positive"""
        with pytest.raises(ValidationError):
            log_grid(1.0, 0.5, 10)
        with pytest.raises(ValidationError):
            log_grid(0.0, 1.0, 10)


class TestPairFibering:
    """Test fibering of discrete pairs"""

    def test_closed_form_for_constant_potential(self, seed_pair, params, constant_potential, rational_potential):
        """Test that only non-constant potentials resample A(t x)"""
        assert FiberMap.from_pair(seed_pair, params, constant_potential).is_closed_form
        assert not FiberMap.from_pair(seed_pair, params, rational_potential).is_closed_form
        assert FiberMap.from_pair(seed_pair, params, rational_potential, paper_literal=True).is_closed_form

    def test_h_prime_at_one_is_G(self, seed_pair, params, rational_potential):
        """Test G(u, v) = h'(1) with the radial correction"""
        fiber = FiberMap.from_pair(seed_pair, params, rational_potential)

        assert fiber.h_prime(1.0) == pytest.approx(constraint_G(seed_pair, params, rational_potential), rel=1e-10)

    def test_regridded_scan_tracks_h_prime(self, seed_pair, params, constant_potential):
        """Test that G on the interpolated grid pair follows t h'(t) near t = 1"""
        fiber = FiberMap.from_pair(seed_pair, params, constant_potential)

        row = fiber.scan([1.0], regrid=True)[0]

        assert row.G == pytest.approx(row.t * row.h_prime, rel=1e-10)

    @pytest.mark.parametrize("model_name", ["constant_potential", "rational_potential"])
    def test_projection_satisfies_constraint(self, request, seed_pair, params, model_name):
        """Test that the projected pair has |G| within tolerance"""
        model = request.getfixturevalue(model_name)

        q, t_star = project_with_scale(seed_pair, params, model, constraint_tol=1e-6)

        assert t_star > 0
        assert abs(constraint_G(q, params, model)) <= 1e-6 * constraint_scale(q, params, model)
        assert energy_I(q, params, model) > 0

    def test_projection_is_idempotent(self, seed_pair, params, constant_potential):
        """Test that a pair on the manifold is returned unchanged"""
        q = project_to_M(seed_pair, params, constant_potential)

        again, t = project_with_scale(q, params, constant_potential)

        assert t == 1.0
        assert again is q

    def test_projection_scale_near_tbar(self, seed_pair, params, constant_potential):
        """Test that the grid root stays close to the semi-analytic maximizer"""
        tbar = find_tbar(seed_pair, params, constant_potential)

        _, t_star = project_with_scale(seed_pair, params, constant_potential)

        assert 1.0 < tbar < 1.5
        assert t_star == pytest.approx(tbar, rel=2e-2)

    def test_projection_without_coupling_fails(self, medium_grid, params, constant_potential):
        """Test that a pair with C = 0 cannot be projected"""
        u = Field.from_function(medium_grid, lambda *x: np.exp(-sum(c ** 2 for c in x)))
        p = Pair(u, Field.zeros(medium_grid))

        with pytest.raises(FiberingError):
            project_with_scale(p, params, constant_potential)
