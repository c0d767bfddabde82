import numpy as np
import pytest

from app.models.requests import Params
from app.numerics.fibering import FiberMap
from app.numerics.functional import (
    breakdown,
    constraint_G,
    constraint_scale,
    coupling,
    energy_I,
    grad_G,
    grad_I,
    gradients,
    pairing,
    pohozaev_P,
    reduced_J,
)
from app.numerics.grid import Field, Grid, Pair, scale_pair
from app.numerics.potential import ConstantPotential, RationalPotential
from tests.conftest import angular_gaussian


def _bumps(grid, seed):
    rng = np.random.default_rng(seed)
    coords = grid.coordinates()

    def field():
        values = np.zeros(grid.shape)
        for _ in range(3):
            center = rng.uniform(-1.0, 1.0, size=3)
            width = rng.uniform(1.0, 2.0)
            r2 = sum((x - c) ** 2 for x, c in zip(coords, center))
            values = values + rng.uniform(-1.0, 1.0) * np.exp(-r2 / width ** 2)
        return Field(grid, values)

    return Pair(field(), field())


def _directional(fn, p, q, eps=1e-6):
    return (fn(p + q * eps) - fn(p - q * eps)) / (2 * eps)


class TestEnergyTerms:
    """Test the integrals entering I, G and P"""

    def test_terms_are_nonnegative(self, seed_pair, params, rational_potential):
        """Test that K, M, Q, C and R are nonnegative for an admissible potential"""
        b = breakdown(seed_pair, params, rational_potential)

        assert min(b.as_dict().values()) >= 0.0
        assert len(b.as_row()) == 5

    def test_constant_potential_has_no_radial_term(self, seed_pair, params, constant_potential):
        """Test that the literal and full constraints agree when A is constant"""
        assert breakdown(seed_pair, params, constant_potential).radial_term == 0.0
        assert constraint_G(seed_pair, params, constant_potential) == constraint_G(
            seed_pair, params, constant_potential, paper_literal=True
        )

    def test_literal_constraint_drops_radial_term(self, seed_pair, params, rational_potential):
        """Test G - G_literal = R"""
        full = constraint_G(seed_pair, params, rational_potential)
        literal = constraint_G(seed_pair, params, rational_potential, paper_literal=True)

        assert full - literal == pytest.approx(breakdown(seed_pair, params, rational_potential).radial_term)

    def test_coupling_vanishes_with_one_component(self, medium_grid, params):
        """Test that C = 0 when v = 0"""
        p = Pair(angular_gaussian(medium_grid), Field.zeros(medium_grid))

        assert coupling(p, params) == 0.0

    def test_small_pairs_have_positive_energy(self, seed_pair, params, constant_potential):
        """Test that I > 0 near the origin"""
        assert energy_I(seed_pair * 1e-2, params, constant_potential) > 0.0

    def test_reduced_identity(self, seed_pair, params, rational_potential):
        """Test J = I - G / (N + p) for a non-constant potential"""
        I = energy_I(seed_pair, params, rational_potential)
        G = constraint_G(seed_pair, params, rational_potential)
        J = reduced_J(seed_pair, params, rational_potential)

        assert J == pytest.approx(I - G / (params.N + params.p), rel=1e-12, abs=1e-12)
        assert J > 0.0

    def test_constraint_scale_bounds_constraint(self, seed_pair, params, rational_potential):
        """Test |G| <= sum of |terms|"""
        assert abs(constraint_G(seed_pair, params, rational_potential)) <= constraint_scale(
            seed_pair, params, rational_potential
        )

    def test_constraint_is_derivative_along_fiber(self, seed_pair, params, rational_potential):
        """Test G = t h'(t) at t = 1 through the semi-analytic fibering map"""
        fiber = FiberMap.from_pair(seed_pair, params, rational_potential)

        assert fiber.h_prime(1.0) == pytest.approx(constraint_G(seed_pair, params, rational_potential), rel=1e-10)
        assert fiber.h(1.0) == pytest.approx(energy_I(seed_pair, params, rational_potential), rel=1e-10)


class TestGradients:
    """Test exact discrete gradients against central differences"""

    @pytest.mark.parametrize("literal", [False, True])
    def test_gradients_match_finite_differences(self, medium_grid, params, rational_potential, literal):
        """Test <grad F, q> against a central difference of F along q"""
        p = _bumps(medium_grid, 3)
        q = _bumps(medium_grid, 4)

        dI = _directional(lambda x: energy_I(x, params, rational_potential), p, q)
        dG = _directional(lambda x: constraint_G(x, params, rational_potential, literal), p, q)

        assert pairing(grad_I(p, params, rational_potential), q) == pytest.approx(dI, rel=1e-6, abs=1e-8)
        assert pairing(grad_G(p, params, rational_potential, literal), q) == pytest.approx(dG, rel=1e-6, abs=1e-8)

    def test_non_integer_exponents(self, medium_grid):
        """Test the coupling gradient for alpha = 2.5, beta = 1.5 away from zeros of u, v"""
        params = Params(alpha=2.5, beta=1.5)
        model = ConstantPotential(1.0)
        positive = Field.from_function(medium_grid, lambda *x: 1.0 + np.exp(-sum(c ** 2 for c in x)))
        p = Pair(positive, positive * 0.5)
        q = _bumps(medium_grid, 5)

        dI = _directional(lambda x: energy_I(x, params, model), p, q)

        assert pairing(grad_I(p, params, model), q) == pytest.approx(dI, rel=1e-6, abs=1e-8)

    def test_combined_gradients(self, seed_pair, params, rational_potential):
        """Test that the shared pass returns the same gradients"""
        g_I, g_G = gradients(seed_pair, params, rational_potential)

        assert np.allclose(g_I.u.values, grad_I(seed_pair, params, rational_potential).u.values)
        assert np.allclose(g_G.v.values, grad_G(seed_pair, params, rational_potential).v.values)

    def test_pohozaev_matches_scaling_combination(self, seed_pair, params, constant_potential):
        """Test P = (N-2)(K+Q) + N M - (2N/p) C for constant A"""
        b = breakdown(seed_pair, params, constant_potential)
        N, p = params.N, params.p
        expected = (N - 2) * (b.kinetic + b.quasilinear) + N * b.mass - (2 * N / p) * b.coupling

        assert pohozaev_P(seed_pair, params, constant_potential) == pytest.approx(expected)


@pytest.mark.slow
class TestScalingIdentities:
    """Test I(u_t, v_t) = h(t) on the interpolated grid pair"""

    @pytest.mark.parametrize("t", [0.8, 1.25])
    def test_energy_along_fiber(self, params, t):
        """Test agreement of the regridded energy with the fibering map"""
        grid = Grid(3, 8.0, 97)
        model = RationalPotential(1.0, 2.0, 1.5)
        p = Pair(angular_gaussian(grid, amplitude=0.5), angular_gaussian(grid, amplitude=0.5))
        fiber = FiberMap.from_pair(p, params, model)

        regridded = energy_I(scale_pair(p, t), params, model)

        assert regridded == pytest.approx(fiber.h(t), rel=1e-2)

    @pytest.mark.parametrize("t", [0.5, 2.0])
    def test_error_decreases_under_refinement(self, params, t):
        """Test that the regridding error shrinks when the grid is refined"""
        model = RationalPotential(1.0, 2.0, 1.5)
        errors = []
        for n in (49, 97):
            grid = Grid(3, 8.0, n)
            p = Pair(angular_gaussian(grid, amplitude=0.5), angular_gaussian(grid, amplitude=0.5))
            fiber = FiberMap.from_pair(p, params, model)
            errors.append(abs(energy_I(scale_pair(p, t), params, model) - fiber.h(t)))

        assert errors[1] < errors[0]
