from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Literal, Optional

from ..config import settings
from .continuation import ContinuationConfig

SCHEMA_VERSION = 1


# Request schemas
class SeedSpec(BaseModel):
    k: int = Field(..., ge=1)
    t0: float = Field(settings.seed_amplitude, description="signed seed amplitude, |t0| in (0, 0.5]")
    direction: Literal["both", "positive", "negative"] = "both"

    @field_validator("t0")
    @classmethod
    def check_amplitude(cls, value: float) -> float:
        if not 0 < abs(value) <= 0.5:
            raise ValueError(f"|t0| must lie in (0, 0.5], got {value}")
        return value

    def signed_amplitudes(self) -> list[float]:
        t = abs(self.t0)
        if self.direction == "positive":
            return [t]
        if self.direction == "negative":
            return [-t]
        return [t, -t]


class TrivialBranchSpec(BaseModel):
    eps_start: float = Field(1.2, gt=0)
    eps_stop: float = Field(0.15, gt=0)


class EvolutionSpec(BaseModel):
    name: str = Field(..., min_length=1, max_length=100, pattern=r"^[A-Za-z0-9_\-]+$")
    eps: float = Field(..., gt=0)
    T: float = Field(..., gt=0)
    dt: float = Field(settings.evolution_dt, gt=0)
    sample_every: int = Field(100, ge=1)
    initial_modes: dict[int, float] = Field(
        default_factory=lambda: {1: 0.1}, description="sine amplitudes of u0 keyed by mode"
    )
    probe_amplitude: Optional[float] = Field(None, ge=0, description="run a stability probe of u=0")
    probe_T: float = Field(20.0, gt=0)

    @field_validator("initial_modes")
    @classmethod
    def check_modes(cls, value: dict[int, float]) -> dict[int, float]:
        if any(k < 1 for k in value):
            raise ValueError("initial_modes keys must be positive mode indices")
        return value


class RunConfig(BaseModel):
    schema_version: int = SCHEMA_VERSION
    r: float
    s: float
    modes: int = Field(settings.modes, ge=2)
    branches: list[SeedSpec] = Field(default_factory=list)
    trivial: Optional[TrivialBranchSpec] = None
    continuation: ContinuationConfig = Field(default_factory=ContinuationConfig)
    evolution: list[EvolutionSpec] = Field(default_factory=list)
    output_dir: str = settings.default_output_dir
    rng_seed: int = 0
    profiles_per_branch: int = Field(8, ge=1)

    @field_validator("schema_version")
    @classmethod
    def check_version(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value}, expected {SCHEMA_VERSION}")
        return value

    @field_validator("s")
    @classmethod
    def check_s(cls, value: float) -> float:
        if value <= 1:
            raise ValueError(f"s must satisfy s > 1, got {value}")
        return value

    @model_validator(mode="after")
    def check_model(self):
        if not -1 <= self.r < self.s:
            raise ValueError(f"r must lie in [-1, s), got r={self.r}, s={self.s}")
        for seed in self.branches:
            if 2 * seed.k > self.modes:
                raise ValueError(f"modes={self.modes} cannot resolve the corrector of k={seed.k} (needs 2k)")
        for run in self.evolution:
            if any(k > self.modes for k in run.initial_modes):
                raise ValueError(f"evolution run {run.name} sets a mode above modes={self.modes}")
        if "modes" not in self.continuation.model_fields_set:
            self.continuation = self.continuation.model_copy(update={"modes": self.modes})
        elif self.continuation.modes != self.modes:
            raise ValueError("continuation.modes must match modes")
        return self
