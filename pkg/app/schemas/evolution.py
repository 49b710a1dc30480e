from pydantic import BaseModel, Field
from typing import Optional


# Response schemas
class EvolutionSummary(BaseModel):
    name: str
    eps: float
    T: float
    dt: float
    samples: int
    final_l2: float
    max_energy_residual: Optional[float] = Field(None, description="None when fewer than 3 samples were taken")
    verdict: Optional[str] = None
    output: str


class EvolutionReport(BaseModel):
    runs: list[EvolutionSummary]
