from typing import List, Optional, Sequence
import math

import numpy as np
import structlog

from ..config import settings
from ..exceptions import DegenerateField
from ..models.branch import Branch, BranchPoint, Termination
from ..models.field import ModelParams, SpectralField
from ..schemas.diagnostics import BranchDiagnostics, DiagnosticReport, IdentityReport, SmallEpsTrendReport
from ..utils import spectral
from .bifurcation_service import BifurcationService

logger = structlog.get_logger(__name__)


def _rel_error(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def _monotone(values: np.ndarray, increasing: bool) -> bool:
    if values.size < 2:
        return False
    steps = np.diff(values) if increasing else -np.diff(values)
    slack = 1e-12 * float(np.max(np.abs(values)))
    return bool(np.all(steps >= -slack) and steps.sum() > 0)


class DiagnosticsService:
    """Runtime checks of the steady-state identities and branch-level claims"""

    def __init__(self):
        self.bifurcation = BifurcationService()

    def _nontrivial(self, branch: Branch) -> List[BranchPoint]:
        return [pt for pt in branch.points if pt.l2 > settings.trivial_l2_threshold]

    def check_energy_identity(self, p: ModelParams, u: SpectralField, tolerance: Optional[float] = None) -> IdentityReport:
        """‖u‖²_{Ḣ^{r/2}} / ‖u‖²_{Ḣ^{s/2}} = ε on nontrivial steady states"""
        tolerance = tolerance or settings.identity_tolerance
        hs = spectral.sobolev_seminorm(u, p.s / 2.0)
        if hs < 1e-12:
            raise DegenerateField(f"energy identity undefined for ‖u‖_Hs/2 = {hs:.3e}")
        ratio = (spectral.sobolev_seminorm(u, p.r / 2.0) / hs) ** 2
        rel = _rel_error(ratio, p.eps)
        return IdentityReport(
            name="energy_identity", lhs=ratio, rhs=p.eps, rel_error=rel,
            tolerance=tolerance, passed=rel < tolerance,
        )

    def check_apriori_hs(self, p: ModelParams, u: SpectralField) -> IdentityReport:
        """ε‖u‖_{Ḣ^s} ≤ ‖u‖_{Ḣ^r} + ‖u‖_{Ḣ^1}‖u‖_{L^∞}"""
        lhs = p.eps * spectral.sobolev_seminorm(u, p.s)
        rhs = spectral.sobolev_seminorm(u, p.r) + spectral.sobolev_seminorm(u, 1.0) * spectral.linf_norm(u)
        slack = settings.apriori_slack
        return IdentityReport(
            name="apriori_hs", lhs=lhs, rhs=rhs, rel_error=_rel_error(lhs, rhs) if rhs > 0 else 0.0,
            tolerance=slack, passed=lhs <= rhs * (1.0 + slack),
        )

    def check_eps_window(self, branch: Branch, margin: Optional[float] = None) -> IdentityReport:
        """Nontrivial points satisfy 0 < ε < 1; C_1 covers (σ_2 + margin, 1 − margin); seeds open leftward.

        Coverage is only asserted for traces that ran to a natural end, not for
        ones cut off by max_steps.
        """
        margin = settings.eps_window_margin if margin is None else margin
        tol = settings.eps_open_tolerance
        points = self._nontrivial(branch)
        if not points:
            return IdentityReport(
                name="eps_window", lhs=0.0, rhs=1.0, rel_error=0.0, tolerance=tol, passed=True, vacuous=True,
            )

        eps = np.array([pt.eps for pt in points])
        inside = bool(np.all((eps > 0) & (eps < 1.0 + tol)))
        details = {"eps_min": float(eps.min()), "eps_max": float(eps.max()), "outside": float(np.sum(~((eps > 0) & (eps < 1.0 + tol))))}
        passed = inside

        seed = branch.seed
        if seed is not None:
            near_seed = eps[:10]
            subcritical = bool(np.all(near_seed < seed.sigma + tol))
            details["subcritical"] = float(subcritical)
            passed = passed and subcritical
            if seed.k == 1 and branch.termination != Termination.MAX_STEPS:
                low = 2.0 ** (branch.r - branch.s) + margin
                covered = float(eps.min()) <= low and float(eps.max()) >= 1.0 - margin
                details["coverage_low"] = low
                details["coverage_high"] = 1.0 - margin
                details["covered"] = float(covered)
                passed = passed and covered

        return IdentityReport(
            name="eps_window", lhs=float(eps.max()), rhs=1.0, rel_error=_rel_error(float(eps.max()), 1.0),
            tolerance=tol, passed=passed, details=details,
        )

    def check_small_eps_alternative(
        self, points: Sequence[BranchPoint], s: float, window: int = 10
    ) -> SmallEpsTrendReport:
        """Trend of ‖u‖_{Ḣ^{s/2}} and ‖u‖_{L^∞} over the last `window` points as ε decreases.

        Observational only: reports which small-ε alternative (seminorm growth or
        L^∞ decay) the data is consistent with.
        """
        eps = np.array([pt.eps for pt in points])
        if eps.size > 1 and np.any(np.diff(eps) > 0):
            raise ValueError("points must be sorted by decreasing eps")
        hs = np.array([spectral.sobolev_seminorm(pt.u, s / 2.0) for pt in points])
        linf = np.array([spectral.linf_norm(pt.u) for pt in points])
        trivial = bool(np.all(np.array([pt.l2 for pt in points]) <= settings.trivial_l2_threshold))

        report = SmallEpsTrendReport(
            eps=eps.tolist(), hs_half_seminorm=hs.tolist(), linf=linf.tolist(), window=window, trivial=trivial,
        )
        if trivial or eps.size < 2:
            return report
        report.hs_growing = _monotone(hs[-window:], increasing=True)
        report.linf_decaying = _monotone(linf[-window:], increasing=False)
        if report.hs_growing:
            report.consistent_with.append("hs_blowup")
        if report.linf_decaying:
            report.consistent_with.append("linf_decay")
        return report

    def check_hs_window_bounded(
        self, branch: Branch, delta: Optional[float] = None, growth: Optional[float] = None
    ) -> IdentityReport:
        """On points with ε ≥ δ, ‖u‖_{H^s} stays within growth × the window median"""
        delta = settings.hs_window_delta if delta is None else delta
        growth = growth or settings.hs_window_growth
        norms = np.array([
            spectral.sobolev_norm(pt.u, branch.s) for pt in self._nontrivial(branch) if pt.eps >= delta
        ])
        if norms.size == 0:
            return IdentityReport(
                name="hs_window_bounded", lhs=0.0, rhs=0.0, rel_error=0.0, tolerance=growth, passed=True, vacuous=True,
            )
        median = float(np.median(norms))
        peak = float(norms.max())
        return IdentityReport(
            name="hs_window_bounded", lhs=peak, rhs=growth * median, rel_error=_rel_error(peak, median),
            tolerance=growth, passed=peak <= growth * median, details={"delta": delta, "points": float(norms.size)},
        )

    def check_zero_locations(self, branch: Branch, rel_tol: float = 1e-8) -> IdentityReport:
        """Every point of C_k vanishes at x = jπ/k and changes sign exactly 2k times"""
        points = self._nontrivial(branch)
        if branch.seed is None or not points:
            return IdentityReport(
                name="zero_locations", lhs=0.0, rhs=0.0, rel_error=0.0, tolerance=rel_tol, passed=True, vacuous=True,
            )
        k = branch.seed.k
        x = math.pi * np.arange(-k, k) / k
        basis = np.sin(np.outer(x, np.arange(1, branch.modes + 1)))
        worst = 0.0
        bad_counts = 0
        for pt in points:
            peak = spectral.linf_norm(pt.u)
            worst = max(worst, float(np.max(np.abs(basis @ pt.u.coeffs))) / peak)
            if pt.zero_count != 2 * k:
                bad_counts += 1
        return IdentityReport(
            name="zero_locations", lhs=worst, rhs=0.0, rel_error=worst, tolerance=rel_tol,
            passed=worst <= rel_tol and bad_counts == 0,
            details={"expected_zeros": float(2 * k), "points_with_other_count": float(bad_counts)},
        )

    def _worst(self, reports: List[IdentityReport], name: str, tolerance: float) -> IdentityReport:
        if not reports:
            return IdentityReport(name=name, lhs=0.0, rhs=0.0, rel_error=0.0, tolerance=tolerance, passed=True, vacuous=True)
        failing = [r for r in reports if not r.passed]
        worst = max(failing or reports, key=lambda r: r.rel_error)
        return worst.model_copy(update={
            "passed": not failing,
            "details": {"points": float(len(reports)), "failing": float(len(failing))},
        })

    def run_suite(self, branch: Branch, tol_inf: Optional[float] = None) -> BranchDiagnostics:
        """Hard checks (identities, ε-window, zero locations) and soft reports for one branch"""
        tol_inf = tol_inf or settings.newton_tol_inf
        identity_tol = max(settings.identity_tolerance, settings.identity_tolerance_scale * tol_inf)
        points = self._nontrivial(branch)

        identity, apriori = [], []
        for pt in points:
            p = ModelParams(r=branch.r, s=branch.s, eps=pt.eps)
            identity.append(self.check_energy_identity(p, pt.u, identity_tol))
            apriori.append(self.check_apriori_hs(p, pt.u))

        hard = [
            self._worst(identity, "energy_identity", identity_tol),
            self._worst(apriori, "apriori_hs", settings.apriori_slack),
            self.check_eps_window(branch),
            self.check_zero_locations(branch),
        ]
        soft = [self.check_hs_window_bounded(branch)]

        ordered = sorted(branch.points, key=lambda pt: -pt.eps)
        trend = self.check_small_eps_alternative(ordered, branch.s) if ordered else None

        fitted = None
        if branch.seed is not None:
            try:
                fitted = self.bifurcation.empirical_direction(branch)
            except ValueError:
                fitted = None

        diagnostics = BranchDiagnostics(
            label=branch.label,
            k=branch.seed.k if branch.seed else None,
            points=len(branch),
            termination=branch.termination.value,
            hard=hard,
            soft=soft,
            singular_indices=self.bifurcation.detect_singularities(branch),
            trend=trend,
            fitted_ddot_omega=fitted,
        )
        log = logger.bind(label=branch.label)
        for report in hard:
            if not report.passed:
                log.warning("diagnostic failed", check=report.name, rel_error=report.rel_error, details=report.details)
        log.info("diagnostics complete", passed=diagnostics.passed, points=len(branch))
        return diagnostics

    def build_report(self, branches: Sequence[Branch], tol_inf: Optional[float] = None) -> DiagnosticReport:
        results = [self.run_suite(branch, tol_inf) for branch in branches]
        failures = [f"{d.label}:{r.name}" for d in results for r in d.hard if not r.passed]
        return DiagnosticReport(branches=results, passed=not failures, failures=failures)
