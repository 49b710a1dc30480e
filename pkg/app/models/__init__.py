from .field import SpectralField, CosineField, ModelParams
from .steady_state import ResidualReport, JacobianMatrix, NewtonResult
from .bifurcation import BifurcationPoint
from .branch import Termination, Tangent, SeedState, BranchPoint, Branch
from .trajectory import StabilityVerdict, Trajectory

__all__ = [
    "SpectralField",
    "CosineField",
    "ModelParams",
    "ResidualReport",
    "JacobianMatrix",
    "NewtonResult",
    "BifurcationPoint",
    "Termination",
    "Tangent",
    "SeedState",
    "BranchPoint",
    "Branch",
    "StabilityVerdict",
    "Trajectory",
]
