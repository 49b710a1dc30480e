from typing import Optional
import math

import numpy as np
import scipy.linalg
import structlog

from ..config import settings
from ..exceptions import NoConvergence, SingularJacobian
from ..models.field import ModelParams, SpectralField
from ..models.steady_state import JacobianMatrix, NewtonResult, ResidualReport
from ..schemas.continuation import NewtonConfig
from ..utils import spectral

logger = structlog.get_logger(__name__)


class SteadyStateService:
    """F(ε, u) = Λ^r u − ε Λ^s u − u u_x, its derivatives and a Newton corrector"""

    def linear_symbol(self, p: ModelParams, modes: int) -> np.ndarray:
        """Diagonal k^r − ε k^s of the linear part"""
        k = np.arange(1, modes + 1, dtype=float)
        return k ** p.r - p.eps * k ** p.s

    def residual(self, p: ModelParams, u: SpectralField) -> ResidualReport:
        linear = spectral.lambda_apply(p.r, u) - p.eps * spectral.lambda_apply(p.s, u)
        field = linear - spectral.nonlinear_term(u)
        return ResidualReport(
            residual=field,
            inf_norm=spectral.linf_norm(field),
            l2_norm=spectral.sobolev_seminorm(field, 0.0),
        )

    def parameter_derivative(self, p: ModelParams, u: SpectralField) -> SpectralField:
        """∂_ε F(ε, u) = −Λ^s u"""
        return -spectral.lambda_apply(p.s, u)

    def advection_matrix(self, u: SpectralField) -> np.ndarray:
        """Matrix A with A·v = sine coefficients (modes 1..M) of ∂_x(u v).

        Column j is ∂_x(u sin(jx)) = Σ_k a_k [((k+j)/2) sin((k+j)x) − (|k−j|/2) sin(|k−j|x)],
        so A[m, j] = (m/2)(a_{m−j} − a_{m+j} − a_{j−m}) with a_i = 0 outside 1..M.
        """
        m = u.modes
        padded = np.concatenate((u.coeffs, [0.0]))
        rows = np.arange(1, m + 1)[:, None]
        cols = np.arange(1, m + 1)[None, :]

        def coeff(index: np.ndarray) -> np.ndarray:
            inside = (index >= 1) & (index <= m)
            return np.where(inside, padded[np.where(inside, index - 1, m)], 0.0)

        return 0.5 * rows * (coeff(rows - cols) - coeff(rows + cols) - coeff(cols - rows))

    def jacobian(self, p: ModelParams, u: SpectralField) -> JacobianMatrix:
        """∂_u F(ε, u)[v] = Λ^r v − ε Λ^s v − (u v)_x"""
        matrix = np.diag(self.linear_symbol(p, u.modes)) - self.advection_matrix(u)
        return JacobianMatrix(matrix=matrix, params=p, base=u)

    def check_regular(self, matrix: np.ndarray, rel_threshold: float) -> float:
        """Smallest singular value; raises SingularJacobian below rel_threshold·‖J‖₂"""
        singular_values = np.linalg.svd(matrix, compute_uv=False)
        norm = float(singular_values[0])
        smallest = float(singular_values[-1])
        if norm == 0.0 or smallest < rel_threshold * norm:
            raise SingularJacobian(
                f"jacobian singular: sigma_min={smallest:.3e}, norm={norm:.3e}",
                min_singular_value=smallest,
                norm=norm,
            )
        return smallest

    def newton_solve(
        self,
        p: ModelParams,
        u0: SpectralField,
        cfg: Optional[NewtonConfig] = None,
    ) -> NewtonResult:
        """Newton's method on F(ε, ·) = 0 at fixed ε.

        Stops once the residual sampled on the dense grid has ∞-norm below
        cfg.tol_inf; convergence is tested after each update.
        """
        cfg = cfg or NewtonConfig()
        u = u0
        report = self.residual(p, u)

        for iteration in range(1, cfg.max_iter + 1):
            jac = self.jacobian(p, u).matrix
            self.check_regular(jac, cfg.singular_rel_threshold)
            step = scipy.linalg.solve(jac, -report.residual.coeffs)
            if not np.all(np.isfinite(step)):
                raise NoConvergence("newton step is not finite", last_iterate=u, residual_inf=report.inf_norm)

            if cfg.damping == "armijo":
                u, report = self._armijo_update(p, u, step, report)
            else:
                u = SpectralField(u.coeffs + step)
                report = self.residual(p, u)

            logger.debug("newton iteration", iteration=iteration, eps=p.eps, residual_inf=report.inf_norm)
            if report.inf_norm < cfg.tol_inf:
                return NewtonResult(u=u, converged=True, iterations=iteration, residual_inf=report.inf_norm)

        logger.warning("newton did not converge", eps=p.eps, max_iter=cfg.max_iter, residual_inf=report.inf_norm)
        raise NoConvergence(
            f"newton did not converge in {cfg.max_iter} iterations (residual {report.inf_norm:.3e})",
            last_iterate=u,
            residual_inf=report.inf_norm,
        )

    def _armijo_update(self, p: ModelParams, u: SpectralField, step: np.ndarray, report: ResidualReport):
        """Backtracking on ‖F‖² with sufficient-decrease constant settings.armijo_c"""
        merit = float(np.dot(report.residual.coeffs, report.residual.coeffs))
        lam = 1.0
        while True:
            trial = SpectralField(u.coeffs + lam * step)
            trial_report = self.residual(p, trial)
            trial_merit = float(np.dot(trial_report.residual.coeffs, trial_report.residual.coeffs))
            if trial_merit <= (1.0 - 2.0 * settings.armijo_c * lam) * merit or math.isclose(merit, 0.0):
                return trial, trial_report
            if lam <= settings.armijo_min_step:
                logger.debug("armijo backtracking exhausted", eps=p.eps, step_length=lam)
                return trial, trial_report
            lam *= 0.5
