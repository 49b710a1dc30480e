from typing import List, Optional, Tuple
import math

import numpy as np
import structlog

from ..config import settings
from ..exceptions import DegenerateField
from ..models.bifurcation import BifurcationPoint
from ..models.branch import Branch, Tangent
from ..models.field import ModelParams, SpectralField
from ..utils import spectral

logger = structlog.get_logger(__name__)


def _check_exponents(r: float, s: float):
    # ModelParams owns the admissible (r, s) range; eps is irrelevant here
    ModelParams(r=r, s=s, eps=1.0)


class BifurcationService:
    """Trivial-branch spectral data, local branch seeds and singularity monitoring"""

    def sigma(self, k: int, r: float, s: float) -> float:
        return float(k) ** (r - s)

    def trivial_spectrum(
        self, r: float, s: float, k_max: int, modes: Optional[int] = None
    ) -> List[BifurcationPoint]:
        """σ_k = k^{r−s} with eigenfunction sin(kx) for k = 1..k_max, decreasing in k"""
        _check_exponents(r, s)
        if k_max < 1:
            raise ValueError(f"k_max must be positive, got {k_max}")
        modes = modes or max(settings.modes, 2 * k_max)
        return [self.make_point(k, r, s, modes) for k in range(1, k_max + 1)]

    def bifurcation_direction(self, k: int, r: float, s: float) -> Tuple[float, float]:
        """(Ω̇(0), Ω̈(0)) of the local curve ε = Ω(t) through (σ_k, 0).

        Ω̈(0) = k^{2−s−r} / (2^{r+1}(1 − 2^{s−r})) is negative for every admissible
        (r, s), so each bifurcation is subcritical.
        """
        _check_exponents(r, s)
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        ddot = float(k) ** (2.0 - s - r) / (2.0 ** (r + 1.0) * (1.0 - 2.0 ** (s - r)))
        return 0.0, ddot

    def corrector_coefficient(self, k: int, r: float, s: float) -> float:
        return float(k) ** (1.0 - r) / (2.0 ** r * (1.0 - 2.0 ** (s - r)))

    def second_order_corrector(self, k: int, r: float, s: float, modes: Optional[int] = None) -> SpectralField:
        """φ_k solving Λ^r φ − σ_k Λ^s φ = k sin(2kx) with no sin(kx) component"""
        _check_exponents(r, s)
        modes = modes or max(settings.modes, 2 * k)
        if 2 * k > modes:
            raise ValueError(f"modes={modes} cannot hold the corrector at mode {2 * k}")
        return SpectralField.mode(2 * k, modes, self.corrector_coefficient(k, r, s))

    def make_point(self, k: int, r: float, s: float, modes: int) -> BifurcationPoint:
        _, ddot = self.bifurcation_direction(k, r, s)
        return BifurcationPoint(
            k=k,
            r=r,
            s=s,
            sigma=self.sigma(k, r, s),
            eigenfunction=SpectralField.mode(k, modes),
            ddot_omega=ddot,
            phi=self.second_order_corrector(k, r, s, modes),
        )

    def seed_from_bifurcation(self, bp: BifurcationPoint, t: float) -> Tuple[ModelParams, SpectralField, Tangent]:
        """Second-order expansion of C_k at amplitude t.

        ε = σ_k + ½Ω̈t², u = t sin(kx) + ½t²φ_k. The tangent is d/dt of that curve,
        oriented towards increasing |t| and normalized in the arclength norm.
        """
        eps = bp.sigma + 0.5 * bp.ddot_omega * t * t
        u = t * bp.eigenfunction + (0.5 * t * t) * bp.phi
        orientation = 1.0 if t >= 0 else -1.0
        raw = Tangent(orientation * bp.ddot_omega * t, orientation * (bp.eigenfunction + t * bp.phi))
        norm = raw.weighted_norm()
        tangent = Tangent(raw.d_eps / norm, (1.0 / norm) * raw.d_u)
        return ModelParams(r=bp.r, s=bp.s, eps=eps), u, tangent

    def count_zeros(self, u: SpectralField, grid_factor: Optional[int] = None) -> int:
        """Sign changes of u on the dense grid over [−π, π), periodic wrap included.

        Samples within 1e−10·max|u| of zero are skipped, so a double zero without a
        sign change is not counted.
        """
        samples = spectral.to_physical(u, spectral.dense_points(u, grid_factor))
        peak = float(np.max(np.abs(samples)))
        if peak <= 1e-10:
            raise DegenerateField(f"cannot count zeros of a field with max|u|={peak:.3e}")
        signs = np.sign(samples[np.abs(samples) > 1e-10 * peak])
        changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
        if signs[-1] != signs[0]:
            changes += 1
        return changes

    def transversality_check(self, k: int, r: float, s: float) -> float:
        """⟨∂_ε L(σ_k) sin(kx), sin(kx)⟩ / ‖sin(kx)‖² = −k^s, nonzero iff 1-transversal"""
        _check_exponents(r, s)
        e = SpectralField.mode(k, k)
        return (-spectral.lambda_apply(s, e)).inner(e) / e.inner(e)

    def detect_singularities(self, branch: Branch, rel_threshold: Optional[float] = None) -> List[int]:
        """Indices where jac_min_sv collapses relative to the branch median or det ∂_u F changes sign"""
        if len(branch) < 2:
            return []
        rel_threshold = rel_threshold or settings.singularity_rel_threshold
        min_sv = np.array([p.jac_min_sv for p in branch.points])
        threshold = rel_threshold * float(np.median(min_sv))
        flagged = []
        for i, point in enumerate(branch.points):
            previous = branch.points[i - 1].det_sign if i > 0 else 0
            sign_flip = previous != 0 and point.det_sign != 0 and point.det_sign != previous
            if point.jac_min_sv < threshold or sign_flip:
                flagged.append(i)
        if flagged:
            logger.info("singularities flagged", label=branch.label, indices=flagged,
                        eps=[branch.points[i].eps for i in flagged])
        return flagged

    def empirical_direction(self, branch: Branch, n_points: int = 10) -> float:
        """Least-squares Ω̈ from ε − σ_k ≈ Ω̈·A²/2 with A = ‖u‖_{L²}/‖sin kx‖_{L²}"""
        if branch.seed is None:
            raise ValueError("empirical_direction needs a branch seeded at a bifurcation point")
        points = [p for p in branch.points if p.l2 > settings.trivial_l2_threshold][:n_points]
        if len(points) < 2:
            raise ValueError(f"need at least 2 nontrivial points, got {len(points)}")
        amplitude = np.array([p.l2 for p in points]) / math.sqrt(math.pi)
        x = 0.5 * amplitude ** 2
        y = np.array([p.eps for p in points]) - branch.seed.sigma
        fitted, *_ = np.linalg.lstsq(x[:, None], y, rcond=None)
        return float(fitted[0])
