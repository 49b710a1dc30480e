import numpy as np
import pytest

from app.models.field import ModelParams, SpectralField
from app.schemas.continuation import ContinuationConfig, NewtonConfig
from app.services.bifurcation_service import BifurcationService
from app.services.continuation_service import ContinuationService
from app.services.steady_state_service import SteadyStateService
from app.utils import spectral

from .helpers import R, S


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tight_newton():
    return NewtonConfig(tol_inf=1e-10)


@pytest.fixture(scope="session")
def small_config(tight_newton):
    return ContinuationConfig(modes=32, ds0=0.01, ds_min=1e-6, ds_max=0.05, max_steps=40, newton=tight_newton)


@pytest.fixture(scope="session")
def c1_seed(small_config):
    bp = BifurcationService().make_point(1, R, S, small_config.modes)
    return ContinuationService().start_from_bifurcation(bp, 0.05, small_config)


@pytest.fixture(scope="session")
def c1_branch(c1_seed, small_config):
    return ContinuationService().trace_branch(c1_seed, small_config)


@pytest.fixture(scope="session")
def solve_c1(tight_newton):
    """Steady state on C_1 at a given ε: traced from the seed, then Newton-corrected at ε"""
    continuation = ContinuationService()
    steady = SteadyStateService()

    def solve(eps: float, modes: int = 32) -> SpectralField:
        cfg = ContinuationConfig(
            modes=modes, ds0=0.01, ds_min=1e-6, ds_max=0.05, max_steps=400,
            eps_floor=eps - 0.05, newton=tight_newton,
        )
        bp = BifurcationService().make_point(1, R, S, modes)
        branch = continuation.trace_branch(continuation.start_from_bifurcation(bp, 0.05, cfg), cfg)
        nearest = min(branch.points, key=lambda point: abs(point.eps - eps))
        u = steady.newton_solve(ModelParams(r=R, s=S, eps=eps), nearest.u, tight_newton).u
        assert spectral.sobolev_seminorm(u, 0.0) > 0.5
        return u

    return solve
