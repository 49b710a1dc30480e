from .continuation import NewtonConfig, ContinuationConfig
from .diagnostics import IdentityReport, SmallEpsTrendReport, BranchDiagnostics, DiagnosticReport
from .evolution import EvolutionSummary, EvolutionReport
from .run import SCHEMA_VERSION, SeedSpec, TrivialBranchSpec, EvolutionSpec, RunConfig

__all__ = [
    "NewtonConfig",
    "ContinuationConfig",
    "IdentityReport",
    "SmallEpsTrendReport",
    "BranchDiagnostics",
    "DiagnosticReport",
    "EvolutionSummary",
    "EvolutionReport",
    "SCHEMA_VERSION",
    "SeedSpec",
    "TrivialBranchSpec",
    "EvolutionSpec",
    "RunConfig",
]
