from typing import Callable, List, Optional, Tuple
import math

import numpy as np
import scipy.linalg
import structlog

from ..config import settings
from ..exceptions import DegenerateField, NoConvergence, RankDeficient, StepUnderflow
from ..models.bifurcation import BifurcationPoint
from ..models.branch import Branch, BranchPoint, SeedState, Tangent, Termination
from ..models.field import ModelParams, SpectralField
from ..schemas.continuation import ContinuationConfig
from ..utils import spectral
from .bifurcation_service import BifurcationService
from .steady_state_service import SteadyStateService

logger = structlog.get_logger(__name__)

# (residual, jacobian, residual_inf) of a system G(X) = 0 with X = (λ, x): residual has
# n entries, jacobian is n × (n+1) with the λ column first.
SystemFn = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, float]]


def arclength_weights(modes: int) -> np.ndarray:
    """Diagonal of W in ‖(δε, δu)‖² = δε² + ‖δu‖²_{L²}"""
    return np.concatenate(([1.0], np.full(modes, math.pi)))


def null_tangent(
    jacobian: np.ndarray,
    weights: np.ndarray,
    previous: Optional[np.ndarray] = None,
    rank_tol: Optional[float] = None,
) -> np.ndarray:
    """Unit null vector (in the W-norm) of an n × (n+1) Jacobian.

    Computed from the SVD of J·W^{−1/2}; the returned x = W^{−1/2} y has xᵀWx = 1.
    Raises RankDeficient when the n-th singular value falls below rank_tol times
    the largest.
    """
    rank_tol = rank_tol or settings.tangent_rank_tol
    scale = 1.0 / np.sqrt(weights)
    _, singular_values, vt = np.linalg.svd(jacobian * scale[None, :])
    if singular_values[0] == 0.0 or singular_values[-1] < rank_tol * singular_values[0]:
        raise RankDeficient(
            f"bordered system rank deficient: sigma_n={singular_values[-1]:.3e}, "
            f"sigma_1={singular_values[0]:.3e}"
        )
    x = vt[-1] * scale
    if previous is not None:
        if float(np.dot(weights * x, previous)) < 0:
            x = -x
    elif x[np.argmax(np.abs(x))] < 0:
        x = -x
    return x


def solve_bordered(
    system: SystemFn,
    base: np.ndarray,
    tangent: np.ndarray,
    ds: float,
    weights: np.ndarray,
    tol: float,
    max_iter: int,
    predictor: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, int]:
    """Newton on {G(X) = 0, ⟨W τ, X − X_b⟩ − ds = 0}.

    Convergence (∞-norm of both residual blocks below tol) is tested before each
    update, so an exact predictor returns after zero iterations. The parameter λ
    must stay positive; an iterate with λ ≤ 0 counts as a failed correction.
    """
    x = base + ds * tangent if predictor is None else np.array(predictor, dtype=float)
    border = weights * tangent
    for iteration in range(max_iter + 1):
        if x[0] <= 0 or not np.all(np.isfinite(x)):
            raise NoConvergence("bordered iterate left the admissible parameter range", last_iterate=x)
        residual, jac, system_inf = system(x)
        constraint = float(np.dot(border, x - base)) - ds
        residual_inf = max(system_inf, abs(constraint))
        if residual_inf < tol:
            return x, iteration
        if iteration == max_iter:
            break
        augmented = np.vstack((jac, border))
        rhs = -np.concatenate((residual, [constraint]))
        try:
            x = x + scipy.linalg.solve(augmented, rhs)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NoConvergence(f"bordered solve failed: {e}", last_iterate=x, residual_inf=residual_inf)
    raise NoConvergence(
        f"bordered newton did not converge in {max_iter} iterations (residual {residual_inf:.3e})",
        last_iterate=x,
        residual_inf=residual_inf,
    )


class ContinuationService:
    """Keller pseudo-arclength continuation of F(ε, u) = 0"""

    def __init__(self):
        self.steady_state = SteadyStateService()
        self.bifurcation = BifurcationService()

    def _system(self, p: ModelParams) -> SystemFn:
        def system(x: np.ndarray):
            point = p.with_eps(x[0])
            u = SpectralField(x[1:])
            report = self.steady_state.residual(point, u)
            jac = np.column_stack((
                self.steady_state.parameter_derivative(point, u).coeffs,
                self.steady_state.jacobian(point, u).matrix,
            ))
            return report.residual.coeffs, jac, report.inf_norm
        return system

    def tangent(self, p: ModelParams, u: SpectralField, previous_tangent: Optional[Tangent] = None) -> Tangent:
        """Unit null direction (δε, δu) of [∂_u F | ∂_ε F] at (ε, u)"""
        jac = np.column_stack((
            self.steady_state.parameter_derivative(p, u).coeffs,
            self.steady_state.jacobian(p, u).matrix,
        ))
        previous = previous_tangent.as_vector() if previous_tangent is not None else None
        return Tangent.from_vector(null_tangent(jac, arclength_weights(u.modes), previous))

    def branch_point(self, p: ModelParams, u: SpectralField, arclength: float) -> BranchPoint:
        """Record (ε, u) with its singularity indicators"""
        fu = self.steady_state.jacobian(p, u).matrix
        min_sv = float(np.linalg.svd(fu, compute_uv=False)[-1])
        lu, piv = scipy.linalg.lu_factor(fu, check_finite=False)
        diagonal = np.diag(lu)
        if np.any(diagonal == 0):
            det_sign = 0
        else:
            swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
            det_sign = int(np.prod(np.sign(diagonal))) * (-1 if swaps % 2 else 1)
        l2 = spectral.sobolev_seminorm(u, 0.0)
        try:
            zero_count = self.bifurcation.count_zeros(u) if l2 > settings.trivial_l2_threshold else 0
        except DegenerateField:
            zero_count = 0
        return BranchPoint(
            eps=p.eps, u=u, arclength=arclength, l2=l2,
            jac_min_sv=min_sv, zero_count=zero_count, det_sign=det_sign,
        )

    def keller_correct(
        self,
        p: ModelParams,
        base: BranchPoint,
        tangent: Tangent,
        ds: float,
        cfg: Optional[ContinuationConfig] = None,
        predictor: Optional[Tuple[float, SpectralField]] = None,
    ) -> BranchPoint:
        """Correct the predictor base + ds·tangent onto the branch at pseudo-arclength ds"""
        cfg = cfg or ContinuationConfig()
        if ds == 0:
            return base
        if abs(ds) < cfg.ds_min:
            raise StepUnderflow(f"step {ds:.3e} below ds_min={cfg.ds_min:.3e}")

        weights = arclength_weights(base.u.modes)
        start = np.concatenate(([base.eps], base.u.coeffs))
        guess = None if predictor is None else np.concatenate(([predictor[0]], predictor[1].coeffs))
        x, iterations = solve_bordered(
            self._system(p), start, tangent.as_vector(), ds, weights,
            cfg.newton.tol_inf, cfg.newton.max_iter, predictor=guess,
        )
        step = x - start
        distance = math.sqrt(float(np.dot(weights * step, step)))
        logger.debug("keller step converged", eps=float(x[0]), ds=ds, iterations=iterations)
        return self.branch_point(p.with_eps(x[0]), SpectralField(x[1:]), base.arclength + distance)

    def start_from_bifurcation(
        self, bp: BifurcationPoint, t: float, cfg: Optional[ContinuationConfig] = None
    ) -> SeedState:
        """Seed C_k at amplitude t, Newton-correct at fixed ε and orient the tangent like the seed"""
        cfg = cfg or ContinuationConfig()
        if bp.eigenfunction.modes != cfg.modes:
            raise ValueError(f"bifurcation point has {bp.eigenfunction.modes} modes, config expects {cfg.modes}")
        p, u, seed_tangent = self.bifurcation.seed_from_bifurcation(bp, t)
        result = self.steady_state.newton_solve(p, u, cfg.newton)
        try:
            tangent = self.tangent(p, result.u, seed_tangent)
        except RankDeficient:
            logger.warning("seed tangent rank deficient, using expansion tangent", k=bp.k, t=t)
            tangent = seed_tangent
        label = f"C{bp.k}{'+' if t > 0 else '-'}"
        logger.info("branch seeded", label=label, eps=p.eps, newton_iterations=result.iterations)
        return SeedState(params=p, u=result.u, tangent=tangent, bifurcation=bp, label=label)

    def trace_trivial(
        self, p: ModelParams, eps_stop: float, cfg: Optional[ContinuationConfig] = None
    ) -> Branch:
        """Trace (ε, 0) from p.eps towards eps_stop"""
        cfg = cfg or ContinuationConfig()
        direction = 1.0 if eps_stop > p.eps else -1.0
        if direction > 0:
            bounds = {"eps_floor": max(p.eps - cfg.ds_max, 0.0), "eps_ceiling": eps_stop}
        else:
            bounds = {"eps_floor": eps_stop, "eps_ceiling": p.eps + cfg.ds_max}
        cfg = cfg.model_copy(update=bounds)
        zero = SpectralField.zeros(cfg.modes)
        seed = SeedState(params=p, u=zero, tangent=Tangent(direction, zero), label="trivial")
        return self.trace_branch(seed, cfg)

    def trace_branch(self, seed: SeedState, cfg: Optional[ContinuationConfig] = None) -> Branch:
        """Predictor-corrector loop with adaptive step size.

        The step halves on a failed or oversized correction and grows by
        cfg.step_growth after cfg.growth_after_successes accepted steps, clamped
        to [ds_min, ds_max]. Underflow ends the trace with a termination tag.
        """
        cfg = cfg or ContinuationConfig()
        log = logger.bind(label=seed.label)
        points: List[BranchPoint] = [self.branch_point(seed.params, seed.u, 0.0)]
        nontrivial = points[0].l2 > settings.trivial_l2_threshold
        tangent = seed.tangent
        ds = cfg.ds0
        successes = 0
        termination = Termination.MAX_STEPS

        while len(points) - 1 < cfg.max_steps:
            current = points[-1]
            p = seed.params.with_eps(current.eps)
            try:
                candidate = self.keller_correct(p, current, tangent, ds, cfg)
            except StepUnderflow:
                termination = Termination.STEP_UNDERFLOW
                break
            except NoConvergence as e:
                log.debug("step rejected", eps=current.eps, ds=ds, reason=str(e))
                ds, successes = ds / 2.0, 0
                continue

            if candidate.arclength - current.arclength > 2.0 * ds:
                log.debug("step rejected", eps=current.eps, ds=ds, reason="corrector drifted")
                ds, successes = ds / 2.0, 0
                continue

            if not cfg.eps_floor <= candidate.eps <= cfg.eps_ceiling:
                termination = Termination.LEFT_DOMAIN
                break
            if nontrivial and candidate.l2 < settings.trivial_l2_threshold:
                termination = Termination.HIT_TRIVIAL
                break
            tail = 0.0
            if candidate.l2 > settings.trivial_l2_threshold:
                tail = spectral.tail_energy_fraction(candidate.u, seed.params.s / 2.0)
            if tail > cfg.instability_energy_fraction:
                log.warning("under-resolved point", eps=candidate.eps, tail_fraction=tail)
                termination = Termination.INSTABILITY_DETECTED
                break

            points.append(candidate)
            # the trivial branch keeps its seed direction (δε, 0) exactly
            if nontrivial:
                tangent = self._next_tangent(seed.params.with_eps(candidate.eps), current, candidate, tangent, log)

            successes += 1
            if successes >= cfg.growth_after_successes:
                grown = min(ds * cfg.step_growth, cfg.ds_max)
                if grown != ds:
                    log.debug("step grown", ds=grown)
                ds, successes = grown, 0

        branch = Branch(
            points=tuple(points),
            r=seed.params.r,
            s=seed.params.s,
            termination=termination,
            seed=seed.bifurcation,
            label=seed.label,
        )
        log.info("branch traced", points=len(branch), termination=termination.value,
                 eps_min=float(branch.eps_values().min()), eps_max=float(branch.eps_values().max()))
        return branch

    def _next_tangent(self, p: ModelParams, previous: BranchPoint, point: BranchPoint, tangent: Tangent, log):
        try:
            return self.tangent(p, point.u, tangent)
        except RankDeficient:
            log.warning("suspected branch point, continuing along secant", eps=point.eps)
            secant = np.concatenate(([point.eps - previous.eps], point.u.coeffs - previous.u.coeffs))
            weights = arclength_weights(point.u.modes)
            secant = secant / math.sqrt(float(np.dot(weights * secant, secant)))
            return Tangent.from_vector(secant)
