import numpy as np
import pytest

from app.exceptions import RankDeficient, StepUnderflow
from app.models.branch import Termination
from app.models.field import SpectralField
from app.schemas.continuation import ContinuationConfig
from app.services.bifurcation_service import BifurcationService
from app.services.continuation_service import (
    ContinuationService,
    arclength_weights,
    null_tangent,
    solve_bordered,
)
from app.services.diagnostics_service import DiagnosticsService
from app.services.steady_state_service import SteadyStateService

from .helpers import R, S, params

service = ContinuationService()


def _circle(x: np.ndarray):
    residual = np.array([x[0] ** 2 + x[1] ** 2 - 1.0])
    return residual, np.array([[2.0 * x[0], 2.0 * x[1]]]), float(abs(residual[0]))


def test_arclength_weights():
    assert np.array_equal(arclength_weights(3), [1.0, np.pi, np.pi, np.pi])


def test_tangent_on_trivial_branch():
    tangent = service.tangent(params(0.7), SpectralField.zeros(8))
    assert tangent.d_eps == pytest.approx(1.0)
    assert np.allclose(tangent.d_u.coeffs, 0.0, atol=1e-14)


def test_tangent_follows_previous_orientation():
    zero = SpectralField.zeros(8)
    forward = service.tangent(params(0.7), zero)
    backward = service.tangent(params(0.7), zero, previous_tangent=-forward)
    assert backward.d_eps == pytest.approx(-1.0)


def test_tangent_is_rank_deficient_at_first_bifurcation():
    with pytest.raises(RankDeficient):
        service.tangent(params(1.0), SpectralField.zeros(8))


def test_tangent_is_orthogonal_to_rows(c1_branch):
    steady = SteadyStateService()
    for point in c1_branch.points[::5]:
        p = params(point.eps)
        tangent = service.tangent(p, point.u)
        jac = np.column_stack((steady.parameter_derivative(p, point.u).coeffs, steady.jacobian(p, point.u).matrix))
        assert np.linalg.norm(jac @ tangent.as_vector()) < 1e-8 * np.linalg.norm(jac)
        assert tangent.weighted_norm() == pytest.approx(1.0)


def test_keller_correct_with_zero_step_returns_base(c1_seed, small_config):
    base = service.branch_point(c1_seed.params, c1_seed.u, 0.0)
    assert service.keller_correct(c1_seed.params, base, c1_seed.tangent, 0.0, small_config) is base


def test_keller_correct_moves_below_one(c1_seed, small_config):
    base = service.branch_point(c1_seed.params, c1_seed.u, 0.0)
    point = service.keller_correct(c1_seed.params, base, c1_seed.tangent, 0.01, small_config)
    assert point.eps < 1.0
    assert point.eps < base.eps
    assert point.arclength > 0
    assert SteadyStateService().residual(params(point.eps), point.u).inf_norm < 1e-10


def test_keller_correct_rejects_tiny_step(c1_seed, small_config):
    base = service.branch_point(c1_seed.params, c1_seed.u, 0.0)
    with pytest.raises(StepUnderflow):
        service.keller_correct(c1_seed.params, base, c1_seed.tangent, 1e-8, small_config)


def test_bordered_newton_passes_a_fold():
    weights = np.ones(2)
    x = np.array([0.6, -0.8])
    tangent = null_tangent(_circle(x)[1], weights)
    assert np.allclose(tangent, [0.8, 0.6])

    path = [x]
    for _ in range(14):
        x, _ = solve_bordered(_circle, x, tangent, 0.1, weights, tol=1e-12, max_iter=10)
        tangent = null_tangent(_circle(x)[1], weights, previous=tangent)
        path.append(x)

    path = np.array(path)
    assert np.all(np.abs(path[:, 0] ** 2 + path[:, 1] ** 2 - 1.0) < 1e-12)
    assert np.all(np.diff(path[:, 1]) > 0)
    assert path[:, 0].max() > 0.99
    assert path[-1, 0] < path[:, 0].max()
    assert path[-1, 1] > 0


def test_bordered_newton_accepts_exact_predictor():
    base = np.array([0.6, -0.8])
    tangent = np.array([0.8, 0.6])
    x, iterations = solve_bordered(_circle, base, tangent, 0.0, np.ones(2), tol=1e-12, max_iter=5, predictor=base)
    assert iterations == 0
    assert np.array_equal(x, base)


def test_trace_with_no_steps_returns_seed(c1_seed, small_config):
    branch = service.trace_branch(c1_seed, small_config.model_copy(update={"max_steps": 0}))
    assert len(branch) == 1
    assert branch.termination == Termination.MAX_STEPS
    assert branch.points[0].eps == c1_seed.params.eps
    assert branch.label == "C1+"


def test_first_branch_invariants(c1_branch, small_config):
    diagnostics = DiagnosticsService()
    assert len(c1_branch) > 10
    assert c1_branch.seed.k == 1
    for point in c1_branch.points:
        assert point.eps < 1.0
        assert point.zero_count == 2
        assert diagnostics.check_energy_identity(params(point.eps), point.u).passed
    steps = np.diff([point.arclength for point in c1_branch.points])
    assert np.all(steps > 0)
    assert np.all(steps <= 2.0 * small_config.ds_max)


def test_branch_is_closed_under_half_period_shift(c1_branch):
    steady = SteadyStateService()
    for point in c1_branch.points[::10]:
        shifted = point.u.shift(1)
        assert steady.residual(params(point.eps), shifted).inf_norm < 1e-9
        assert DiagnosticsService().bifurcation.count_zeros(shifted) == 2


def test_negative_seed_mirrors_positive(small_config):
    bp = BifurcationService().make_point(1, R, S, small_config.modes)
    cfg = small_config.model_copy(update={"max_steps": 5})
    plus = service.trace_branch(service.start_from_bifurcation(bp, 0.05, cfg), cfg)
    minus = service.trace_branch(service.start_from_bifurcation(bp, -0.05, cfg), cfg)
    assert minus.label == "C1-"
    assert np.allclose(plus.eps_values(), minus.eps_values(), atol=1e-10)
    assert np.allclose(plus.l2_values(), minus.l2_values(), atol=1e-10)


def test_trivial_trace():
    cfg = ContinuationConfig(modes=8, ds0=0.02, ds_min=1e-6, ds_max=0.05, max_steps=100)
    branch = service.trace_trivial(params(1.2), 0.9, cfg)
    assert branch.label == "trivial"
    assert branch.seed is None
    assert branch.termination == Termination.LEFT_DOMAIN
    assert all(point.u == SpectralField.zeros(8) for point in branch.points)
    eps = branch.eps_values()
    assert np.all(np.diff(eps) < 0)
    assert eps.min() >= 0.9


@pytest.mark.slow
def test_trivial_trace_crosses_every_resolved_sigma():
    cfg = ContinuationConfig(modes=128, ds0=0.02, ds_min=1e-6, ds_max=0.05, max_steps=400)
    branch = service.trace_trivial(params(1.2), 0.15, cfg)
    assert branch.termination == Termination.LEFT_DOMAIN
    assert branch.eps_values().min() < 0.2
    assert all(point.u == SpectralField.zeros(128) for point in branch.points)


def test_trivial_trace_keeps_exact_zero_field():
    cfg = ContinuationConfig(modes=16, ds0=0.02, ds_min=1e-6, ds_max=0.05, max_steps=400)
    branch = service.trace_trivial(params(1.2), 0.15, cfg)
    assert branch.termination == Termination.LEFT_DOMAIN
    assert branch.eps_values().min() < 0.2
    assert all(not point.u.coeffs.any() for point in branch.points)
    assert BifurcationService().detect_singularities(branch)


def test_trivial_trace_upwards():
    cfg = ContinuationConfig(modes=8, ds0=0.02, ds_min=1e-6, ds_max=0.05, max_steps=100)
    branch = service.trace_trivial(params(0.3), 0.4, cfg)
    assert np.all(np.diff(branch.eps_values()) > 0)
    assert branch.eps_values().max() <= 0.4


def test_start_rejects_mode_mismatch(small_config):
    bp = BifurcationService().make_point(1, R, S, 16)
    with pytest.raises(ValueError):
        service.start_from_bifurcation(bp, 0.05, small_config)


def test_under_resolved_branch_stops(tight_newton):
    cfg = ContinuationConfig(modes=8, ds0=0.01, ds_min=1e-6, ds_max=0.05, max_steps=10,
                             newton=tight_newton, instability_energy_fraction=1e-30)
    bp = BifurcationService().make_point(1, R, S, 8)
    branch = service.trace_branch(service.start_from_bifurcation(bp, 0.05, cfg), cfg)
    assert branch.termination == Termination.INSTABILITY_DETECTED
    assert len(branch) == 1


@pytest.mark.slow
def test_first_branch_covers_window(tight_newton):
    cfg = ContinuationConfig(modes=64, ds0=0.01, ds_min=1e-6, ds_max=0.05, max_steps=600,
                             eps_floor=0.12, newton=tight_newton)
    bp = BifurcationService().make_point(1, R, S, cfg.modes)
    branch = service.trace_branch(service.start_from_bifurcation(bp, 0.05, cfg), cfg)
    eps = branch.eps_values()
    assert eps.min() <= 0.52
    assert eps.max() >= 0.98
    assert DiagnosticsService().check_eps_window(branch).passed
