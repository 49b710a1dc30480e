from pydantic import BaseModel, Field, model_validator
from typing import Literal

from ..config import settings


class NewtonConfig(BaseModel):
    tol_inf: float = Field(settings.newton_tol_inf, gt=0, description="∞-norm stop on the sampled residual")
    max_iter: int = Field(settings.newton_max_iter, ge=1)
    damping: Literal["none", "armijo"] = "none"
    singular_rel_threshold: float = Field(settings.singular_rel_threshold, gt=0)

    class Config:
        frozen = True


class ContinuationConfig(BaseModel):
    ds0: float = Field(settings.ds0, gt=0)
    ds_min: float = Field(settings.ds_min, gt=0)
    ds_max: float = Field(settings.ds_max, gt=0)
    newton: NewtonConfig = Field(default_factory=NewtonConfig)
    max_steps: int = Field(settings.max_steps, ge=0)
    eps_floor: float = Field(settings.eps_floor, ge=0)
    eps_ceiling: float = Field(settings.eps_ceiling, gt=0)
    modes: int = Field(settings.modes, ge=1)
    step_growth: float = Field(settings.step_growth, ge=1)
    growth_after_successes: int = Field(settings.growth_after_successes, ge=1)
    instability_energy_fraction: float = Field(settings.instability_energy_fraction, gt=0, le=1)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_step_bounds(self):
        if not self.ds_min <= self.ds0 <= self.ds_max:
            raise ValueError(
                f"step bounds must satisfy ds_min <= ds0 <= ds_max "
                f"(got {self.ds_min}, {self.ds0}, {self.ds_max})"
            )
        if self.eps_ceiling <= self.eps_floor:
            raise ValueError("eps_ceiling must exceed eps_floor")
        return self
