from .steady_state_service import SteadyStateService
from .bifurcation_service import BifurcationService
from .continuation_service import ContinuationService
from .evolution_service import EvolutionService
from .diagnostics_service import DiagnosticsService
from .run_service import RunService

__all__ = [
    "SteadyStateService",
    "BifurcationService",
    "ContinuationService",
    "EvolutionService",
    "DiagnosticsService",
    "RunService",
]
