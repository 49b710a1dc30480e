from dataclasses import dataclass
from typing import Tuple
import enum

import numpy as np

from .field import ModelParams, SpectralField


class StabilityVerdict(str, enum.Enum):
    RETURNS = "returns"
    DEPARTS = "departs"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of u_t + u u_x = Λ^r u − ε Λ^s u.

    energies[i] = (‖u‖²_{L²}, ‖u‖²_{Ḣ^{r/2}}, ‖u‖²_{Ḣ^{s/2}}) of states[i].
    """

    params: ModelParams
    times: Tuple[float, ...]
    states: Tuple[SpectralField, ...]
    energies: Tuple[Tuple[float, float, float], ...]
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "energies", tuple(tuple(e) for e in self.energies))
        if not len(self.times) == len(self.states) == len(self.energies):
            raise ValueError("times, states and energies must have equal lengths")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("trajectory times must be strictly increasing")

    def energy_array(self) -> np.ndarray:
        return np.array(self.energies, dtype=float).reshape(-1, 3)

    @property
    def final(self) -> SpectralField:
        return self.states[-1]
