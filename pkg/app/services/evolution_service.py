from typing import List, Optional, Tuple
import math

import numpy as np
import structlog

from ..config import settings
from ..exceptions import BlowupDetected
from ..models.field import ModelParams, SpectralField
from ..models.trajectory import StabilityVerdict, Trajectory
from ..utils import spectral

logger = structlog.get_logger(__name__)


class EvolutionService:
    """IMEX integration of u_t + u u_x = Λ^r u − ε Λ^s u for odd periodic data.

    Linear part by the trapezoid rule (a per-mode division), transport term by
    Adams-Bashforth 2 with an explicit Euler first step.
    """

    def __init__(self, blowup_cap: Optional[float] = None):
        self.blowup_cap = blowup_cap or settings.blowup_cap

    def _symbol(self, p: ModelParams, modes: int) -> np.ndarray:
        k = np.arange(1, modes + 1, dtype=float)
        return k ** p.r - p.eps * k ** p.s

    def transport(self, u: SpectralField) -> SpectralField:
        """N(u) = −u u_x"""
        return -spectral.nonlinear_term(u)

    def _advance(
        self,
        p: ModelParams,
        u: SpectralField,
        dt: float,
        prev_nonlinear: Optional[SpectralField],
        nonlinear: bool,
    ) -> Tuple[SpectralField, Optional[SpectralField]]:
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        half = 0.5 * dt * self._symbol(p, u.modes)
        denominator = 1.0 - half
        if np.any(denominator <= 0):
            raise ValueError(f"dt={dt} makes the implicit linear solve singular or sign-reversing")

        rhs = (1.0 + half) * u.coeffs
        current = None
        if nonlinear:
            current = self.transport(u)
            if prev_nonlinear is None:
                rhs = rhs + dt * current.coeffs
            else:
                rhs = rhs + dt * (1.5 * current.coeffs - 0.5 * prev_nonlinear.coeffs)

        coeffs = rhs / denominator
        self._check_blowup(coeffs)
        return SpectralField(coeffs), current

    def _check_blowup(self, coeffs: np.ndarray):
        if not np.all(np.isfinite(coeffs)):
            raise BlowupDetected("time step produced non-finite coefficients")
        # Σ|a_k| bounds max|u|; sample only when the bound is inconclusive
        if float(np.abs(coeffs).sum()) > self.blowup_cap:
            peak = spectral.linf_norm(SpectralField(coeffs))
            if peak > self.blowup_cap:
                raise BlowupDetected(f"max|u|={peak:.3e} exceeds cap {self.blowup_cap:.1e}; reduce dt")

    def imex_step(
        self,
        p: ModelParams,
        u: SpectralField,
        dt: float,
        prev_nonlinear: Optional[SpectralField] = None,
        nonlinear: bool = True,
    ) -> SpectralField:
        """One CN/AB2 step; without prev_nonlinear the transport term is explicit Euler"""
        advanced, _ = self._advance(p, u, dt, prev_nonlinear, nonlinear)
        return advanced

    def energies(self, p: ModelParams, u: SpectralField) -> Tuple[float, float, float]:
        return (
            spectral.sobolev_seminorm(u, 0.0) ** 2,
            spectral.sobolev_seminorm(u, p.r / 2.0) ** 2,
            spectral.sobolev_seminorm(u, p.s / 2.0) ** 2,
        )

    def evolve(
        self,
        p: ModelParams,
        u0: SpectralField,
        T: float,
        dt: Optional[float] = None,
        sample_every: int = 100,
        nonlinear: bool = True,
    ) -> Trajectory:
        """Integrate to time T with a step that divides T exactly.

        States are sampled at t = 0, every sample_every steps and at T.
        """
        if T <= 0:
            raise ValueError(f"T must be positive, got {T}")
        if sample_every < 1:
            raise ValueError(f"sample_every must be positive, got {sample_every}")
        dt = dt or settings.evolution_dt
        n_steps = max(1, math.ceil(T / dt - 1e-9))
        dt = T / n_steps

        times: List[float] = [0.0]
        states: List[SpectralField] = [u0]
        energies = [self.energies(p, u0)]
        u, previous = u0, None
        for step in range(1, n_steps + 1):
            u, previous = self._advance(p, u, dt, previous, nonlinear)
            if step % sample_every == 0 or step == n_steps:
                times.append(step * dt)
                states.append(u)
                energies.append(self.energies(p, u))

        logger.info("trajectory computed", eps=p.eps, T=T, dt=dt, steps=n_steps, samples=len(times),
                    final_l2=math.sqrt(energies[-1][0]))
        return Trajectory(params=p, times=tuple(times), states=tuple(states), energies=tuple(energies), dt=dt)

    def energy_balance_residual(self, traj: Trajectory) -> List[float]:
        """|½ d/dt‖u‖²_{L²} + ε‖u‖²_{Ḣ^{s/2}} − ‖u‖²_{Ḣ^{r/2}}| at interior samples.

        The time derivative is the second-order three-point formula on the
        (possibly nonuniform) sample times.
        """
        if len(traj.times) < 3:
            raise ValueError(f"energy balance needs at least 3 samples, got {len(traj.times)}")
        t = np.array(traj.times)
        e = traj.energy_array()
        l2, hr, hs = e[:, 0], e[:, 1], e[:, 2]
        residuals = []
        for i in range(1, len(t) - 1):
            h1, h2 = t[i] - t[i - 1], t[i + 1] - t[i]
            slope = (
                -h2 / (h1 * (h1 + h2)) * l2[i - 1]
                + (h2 - h1) / (h1 * h2) * l2[i]
                + h1 / (h2 * (h1 + h2)) * l2[i + 1]
            )
            residuals.append(abs(0.5 * slope + traj.params.eps * hs[i] - hr[i]))
        return residuals

    def random_odd_field(self, modes: int, rng: np.random.Generator) -> SpectralField:
        """Odd field with N(0, 1)/k coefficients scaled to unit L² norm"""
        k = np.arange(1, modes + 1, dtype=float)
        field = SpectralField(rng.standard_normal(modes) / k)
        return (1.0 / spectral.sobolev_seminorm(field, 0.0)) * field

    def stability_probe(
        self,
        p: ModelParams,
        u_star: SpectralField,
        amplitude: float,
        T: float = 20.0,
        dt: Optional[float] = None,
        seed: int = 0,
    ) -> StabilityVerdict:
        """Perturb u_star by a seeded random odd field and see where the flow takes it"""
        if amplitude < 0:
            raise ValueError(f"amplitude must be nonnegative, got {amplitude}")
        if amplitude == 0:
            return StabilityVerdict.RETURNS

        rng = np.random.default_rng(seed)
        start = u_star + amplitude * self.random_odd_field(u_star.modes, rng)
        n_steps = math.ceil(T / (dt or settings.evolution_dt))
        final = self.evolve(p, start, T, dt, sample_every=n_steps).final
        distance = spectral.sobolev_seminorm(final - u_star, 0.0)

        if distance < 0.1 * amplitude:
            verdict = StabilityVerdict.RETURNS
        elif distance > 10.0 * amplitude:
            verdict = StabilityVerdict.DEPARTS
        else:
            verdict = StabilityVerdict.INCONCLUSIVE
        logger.info("stability probe", eps=p.eps, amplitude=amplitude, distance=distance, verdict=verdict.value)
        return verdict
