import os
import shutil
import tempfile

import numpy as np
import pytest

from app.config.settings import Settings
from app.core.dependencies import get_settings
from app.models.requests import Params, RunConfig, SolverConfig
from app.numerics.grid import Field, Grid, Pair
from app.numerics.potential import ConstantPotential, RationalPotential
from app.services.base import BaseService
from app.services.diagnostics import DiagnosticsService
from app.services.solver import SolverService, calibrate_amplitude, seed_on_constraint


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: fine-grid numerical checks (deselect with -m 'not slow')")


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests"""
    temp_path = tempfile.mkdtemp()
    yield temp_path
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture
def test_settings(temp_dir):
    """Test settings writing into a temporary directory"""
    return Settings(
        app_name="Test Nodal Solver",
        app_version="1.0.0-test",
        debug=True,
        output_dir=os.path.join(temp_dir, "results"),
        log_dir=os.path.join(temp_dir, "logs"),
    )


@pytest.fixture
def params():
    """N=3, alpha=beta=2, B=1"""
    return Params()


@pytest.fixture
def small_grid():
    """17^3 nodes on [-8, 8]^3, cheap enough for full solver runs"""
    return Grid(3, 8.0, 17)


@pytest.fixture
def medium_grid():
    return Grid(3, 6.0, 25)


@pytest.fixture
def constant_potential():
    return ConstantPotential(1.0)


@pytest.fixture
def rational_potential():
    return RationalPotential(A0=1.0, A_inf=2.0, length_scale=1.5)


def angular_gaussian(grid: Grid, s: int = 2, width: float = 1.5, amplitude: float = 1.0) -> Field:
    """amplitude * exp(-|x|^2 / width^2) * sin(s theta)"""

    def fn(*x):
        theta = np.arctan2(x[1], x[0])
        return amplitude * np.exp(-sum(c ** 2 for c in x) / width ** 2) * np.sin(s * theta)

    return Field.from_function(grid, fn)


@pytest.fixture(scope="session")
def constrained_seed():
    """Calibrated seed on G = 0 for A = 1 on the medium grid"""
    config, params, grid, model = SolverConfig(), Params(), Grid(3, 6.0, 25), ConstantPotential(1.0)
    widths = (1.5, 1.8)
    amplitude = calibrate_amplitude(config, params, model, grid, widths)
    pair, _ = seed_on_constraint(config, params, model, grid, widths, amplitude)
    return pair


@pytest.fixture
def seed_pair(constrained_seed):
    """Equivariant sign-changing pair just inside G > 0; its fiber maximum lies a little above t = 1"""
    return constrained_seed * 0.9


@pytest.fixture
def small_run():
    """Run config small enough for end-to-end solves in tests"""
    return RunConfig.model_validate(
        {
            "grid": {"half_extent": 8.0, "points_per_axis": 17},
            "solver": {"s": 2, "tol_grad": 1e-3, "max_iter": 500},
            "gradcheck": {"samples": 2},
            "fiber_scan": {"points": 11},
            # coarse grid: the discrete Pohozaev defect is O(h^2)
            "diagnose": {"pohozaev_tol": 0.25},
        }
    )


@pytest.fixture
def base_service(test_settings):
    """Base service instance for testing"""
    return BaseService(test_settings)


@pytest.fixture
def solver_service(test_settings):
    return SolverService(test_settings)


@pytest.fixture
def diagnostics_service(test_settings):
    return DiagnosticsService(test_settings)


@pytest.fixture
def cli_env(temp_dir, monkeypatch):
    """Environment for CLI runs: logs and results under the temporary directory"""
    monkeypatch.setenv("QSS_LOG_DIR", os.path.join(temp_dir, "logs"))
    monkeypatch.setenv("QSS_OUTPUT_DIR", os.path.join(temp_dir, "results"))
    get_settings.cache_clear()
    yield temp_dir
    get_settings.cache_clear()


@pytest.fixture(autouse=True)
def cleanup_test_files():
    """Automatically clean up test files after each test"""
    yield
    for test_dir in ["test_data"]:
        if os.path.exists(test_dir):
            shutil.rmtree(test_dir, ignore_errors=True)
