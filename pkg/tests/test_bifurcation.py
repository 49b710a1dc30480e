from dataclasses import replace
import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from app.exceptions import DegenerateField
from app.models.field import SpectralField
from app.schemas.continuation import ContinuationConfig
from app.services.bifurcation_service import BifurcationService
from app.services.continuation_service import ContinuationService
from app.services.diagnostics_service import DiagnosticsService
from app.services.steady_state_service import SteadyStateService
from app.utils import spectral

from .helpers import R, S, params, synthetic_branch

service = BifurcationService()


@st.composite
def exponents(draw):
    s = draw(st.floats(min_value=1.01, max_value=4.0))
    r = draw(st.floats(min_value=-1.0, max_value=s - 0.01))
    return r, s


def test_trivial_spectrum_for_half_and_three_halves():
    points = service.trivial_spectrum(R, S, 8, modes=16)
    assert [bp.k for bp in points] == list(range(1, 9))
    for bp in points:
        assert bp.sigma == pytest.approx(1.0 / bp.k, rel=1e-14)
        assert np.count_nonzero(bp.eigenfunction.coeffs) == 1
        assert bp.eigenfunction.coeffs[bp.k - 1] == 1.0
    sigmas = [bp.sigma for bp in points]
    assert all(a > b for a, b in zip(sigmas, sigmas[1:]))


def test_sigma_examples():
    assert service.sigma(1, 0.2, 3.0) == 1.0
    assert service.sigma(2, 0.0, 2.0) == pytest.approx(0.25)


def test_trivial_spectrum_rejects_bad_exponents():
    with pytest.raises(ValueError):
        service.trivial_spectrum(0.5, 0.9, 3)
    with pytest.raises(ValueError):
        service.trivial_spectrum(0.5, 1.5, 0)


@pytest.mark.parametrize("k", [1, 2])
def test_bifurcation_direction_examples(k):
    omega_dot, omega_ddot = service.bifurcation_direction(k, R, S)
    assert omega_dot == 0.0
    assert omega_ddot == pytest.approx(-1.0 / (2.0 * math.sqrt(2.0)), rel=1e-12)


@hyp_settings(max_examples=50)
@given(k=st.integers(min_value=1, max_value=40), rs=exponents())
def test_bifurcation_is_always_subcritical(k, rs):
    r, s = rs
    _, omega_ddot = service.bifurcation_direction(k, r, s)
    assert omega_ddot < 0
    assert math.isfinite(omega_ddot)


def test_second_order_corrector_example():
    phi = service.second_order_corrector(1, R, S, modes=8)
    assert phi.coeffs[1] == pytest.approx(-1.0 / math.sqrt(2.0), rel=1e-12)
    assert np.count_nonzero(phi.coeffs) == 1


@pytest.mark.parametrize("k", [1, 2, 3])
def test_second_order_corrector_solves_linear_problem(k):
    modes = 4 * k
    phi = service.second_order_corrector(k, R, S, modes)
    sigma = service.sigma(k, R, S)
    lhs = spectral.lambda_apply(R, phi) - sigma * spectral.lambda_apply(S, phi)
    assert np.allclose(lhs.coeffs, SpectralField.mode(2 * k, modes, float(k)).coeffs, atol=1e-12)


def test_second_order_corrector_needs_room():
    with pytest.raises(ValueError):
        service.second_order_corrector(3, R, S, modes=5)


def test_seed_at_zero_amplitude_is_the_bifurcation_point():
    bp = service.make_point(2, R, S, 8)
    p, u, tangent = service.seed_from_bifurcation(bp, 0.0)
    assert p.eps == bp.sigma
    assert u == SpectralField.zeros(8)
    assert tangent.weighted_norm() == pytest.approx(1.0)
    assert tangent.d_eps == 0.0


def test_seed_tangent_is_unit_and_points_outward():
    bp = service.make_point(1, R, S, 8)
    for t in (0.05, -0.05):
        _, u, tangent = service.seed_from_bifurcation(bp, t)
        assert tangent.weighted_norm() == pytest.approx(1.0)
        assert tangent.d_eps < 0
        assert np.sign(tangent.d_u.coeffs[0]) == np.sign(t)


def test_seed_signs_are_translates(tight_newton):
    bp = service.make_point(1, R, S, 16)
    steady = SteadyStateService()
    plus_p, plus_u, _ = service.seed_from_bifurcation(bp, 0.05)
    minus_p, minus_u, _ = service.seed_from_bifurcation(bp, -0.05)
    assert plus_p.eps == minus_p.eps

    plus = steady.newton_solve(plus_p, plus_u, tight_newton).u
    minus = steady.newton_solve(minus_p, minus_u, tight_newton).u
    assert spectral.sobolev_seminorm(plus, 0.0) == pytest.approx(spectral.sobolev_seminorm(minus, 0.0), rel=1e-10)
    assert np.allclose(plus.shift(1).coeffs, minus.coeffs, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_count_zeros_of_single_mode(k):
    assert service.count_zeros(SpectralField.mode(k, 16)) == 2 * k


def test_count_zeros_of_perturbed_mode():
    assert service.count_zeros(SpectralField([1.0, 0.1, 0.0, 0.0])) == 2


def test_count_zeros_rejects_zero_field():
    with pytest.raises(DegenerateField):
        service.count_zeros(SpectralField.zeros(8))


def test_count_zeros_on_third_branch(tight_newton):
    bp = service.make_point(3, R, S, 16)
    p, u, _ = service.seed_from_bifurcation(bp, 0.05)
    solution = SteadyStateService().newton_solve(p, u, tight_newton).u
    assert service.count_zeros(solution) == 6


def test_transversality_examples():
    assert service.transversality_check(1, R, S) == pytest.approx(-1.0, abs=1e-12)
    assert service.transversality_check(2, R, S) == pytest.approx(-(2 ** 1.5), abs=1e-12)


@hyp_settings(max_examples=30)
@given(k=st.integers(min_value=1, max_value=64), rs=exponents())
def test_transversality_matches_closed_form(k, rs):
    r, s = rs
    value = service.transversality_check(k, r, s)
    assert value != 0
    assert value == pytest.approx(-(k ** s), rel=1e-12)


def test_detect_singularities_on_synthetic_branches():
    assert service.detect_singularities(synthetic_branch([0.9, 0.8, 0.7, 0.6])) == []

    branch = synthetic_branch([0.9, 0.8, 0.7, 0.6, 0.5])
    points = list(branch.points)
    points[2] = replace(points[2], jac_min_sv=1e-9)
    assert service.detect_singularities(replace(branch, points=tuple(points))) == [2]


def test_detect_singularities_on_sign_flip():
    branch = synthetic_branch([0.9, 0.8, 0.7, 0.6])
    points = tuple(replace(pt, det_sign=sign) for pt, sign in zip(branch.points, [1, 1, -1, -1]))
    assert service.detect_singularities(replace(branch, points=points)) == [2]


def test_detect_singularities_on_trivial_branch():
    cfg = ContinuationConfig(modes=16, ds0=0.02, ds_min=1e-6, ds_max=0.05, max_steps=200)
    branch = ContinuationService().trace_trivial(params(1.05), 0.45, cfg)
    flagged = service.detect_singularities(branch)
    flagged_eps = [branch.points[i].eps for i in flagged]
    assert len(flagged) == 2
    assert any(abs(eps - 1.0) < 0.05 for eps in flagged_eps)
    assert any(abs(eps - 0.5) < 0.05 for eps in flagged_eps)


@pytest.mark.parametrize("k", [1, 2])
def test_empirical_direction_recovers_formula(k, tight_newton):
    cfg = ContinuationConfig(modes=32, ds0=0.005, ds_min=1e-6, ds_max=0.01, max_steps=10, newton=tight_newton)
    continuation = ContinuationService()
    bp = service.make_point(k, R, S, cfg.modes)
    branch = continuation.trace_branch(continuation.start_from_bifurcation(bp, 0.05, cfg), cfg)
    fitted = service.empirical_direction(branch)
    assert fitted == pytest.approx(bp.ddot_omega, rel=0.05)


def test_empirical_direction_needs_a_seed():
    with pytest.raises(ValueError):
        service.empirical_direction(synthetic_branch([0.9, 0.8], seeded=False))


def _trace_from_seed(k: int, cfg: ContinuationConfig):
    continuation = ContinuationService()
    bp = service.make_point(k, R, S, cfg.modes)
    return continuation.trace_branch(continuation.start_from_bifurcation(bp, 0.05, cfg), cfg)


@pytest.mark.parametrize("k", [2, 3])
def test_zero_count_is_kept_along_branch(k, tight_newton):
    cfg = ContinuationConfig(modes=32, ds0=0.01, ds_min=1e-6, ds_max=0.05, max_steps=15, newton=tight_newton)
    branch = _trace_from_seed(k, cfg)
    assert len(branch) > 5
    assert all(point.zero_count == 2 * k for point in branch.points)
    assert DiagnosticsService().check_zero_locations(branch).passed


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_zero_count_is_kept_along_resolved_branches(k, tight_newton):
    cfg = ContinuationConfig(modes=128, ds0=0.01, ds_min=1e-6, ds_max=0.05, max_steps=200, newton=tight_newton)
    branch = _trace_from_seed(k, cfg)
    assert branch.eps_values().min() < 0.9 * service.sigma(k, R, S)
    assert all(point.zero_count == 2 * k for point in branch.points)
    assert DiagnosticsService().check_zero_locations(branch).passed
