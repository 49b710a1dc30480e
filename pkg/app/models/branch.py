from dataclasses import dataclass
from typing import Optional, Tuple
import enum
import math

import numpy as np

from .bifurcation import BifurcationPoint
from .field import ModelParams, SpectralField


class Termination(str, enum.Enum):
    LEFT_DOMAIN = "left_domain"
    MAX_STEPS = "max_steps"
    STEP_UNDERFLOW = "step_underflow"
    HIT_TRIVIAL = "hit_trivial"
    INSTABILITY_DETECTED = "instability_detected"


@dataclass(frozen=True)
class Tangent:
    """Unit direction (δε, δu) in the norm δε² + ‖δu‖²_{L²}"""

    d_eps: float
    d_u: SpectralField

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "Tangent":
        return cls(float(vector[0]), SpectralField(vector[1:]))

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.d_eps], self.d_u.coeffs))

    def weighted_norm(self) -> float:
        return math.sqrt(self.d_eps ** 2 + math.pi * float(np.dot(self.d_u.coeffs, self.d_u.coeffs)))

    def dot(self, other: "Tangent") -> float:
        return self.d_eps * other.d_eps + other.d_u.inner(self.d_u)

    def __neg__(self) -> "Tangent":
        return Tangent(-self.d_eps, -self.d_u)


@dataclass(frozen=True)
class SeedState:
    """Converged starting point of a trace together with its initial direction"""

    params: ModelParams
    u: SpectralField
    tangent: Tangent
    bifurcation: Optional[BifurcationPoint] = None
    label: str = "branch"


@dataclass(frozen=True)
class BranchPoint:
    eps: float
    u: SpectralField
    arclength: float
    l2: float
    jac_min_sv: float
    zero_count: int
    det_sign: int = 0


@dataclass(frozen=True)
class Branch:
    points: Tuple[BranchPoint, ...]
    r: float
    s: float
    termination: Termination
    seed: Optional[BifurcationPoint] = None
    label: str = "branch"

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        arclengths = [p.arclength for p in self.points]
        if any(b <= a for a, b in zip(arclengths, arclengths[1:])):
            raise ValueError("branch arclength must be strictly increasing")

    @property
    def modes(self) -> int:
        return self.points[0].u.modes if self.points else 0

    def __len__(self) -> int:
        return len(self.points)

    def eps_values(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    def l2_values(self) -> np.ndarray:
        return np.array([p.l2 for p in self.points])
