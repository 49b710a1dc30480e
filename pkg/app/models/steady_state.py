from dataclasses import dataclass

import numpy as np

from .field import ModelParams, SpectralField


@dataclass(frozen=True)
class ResidualReport:
    """F(ε, u) with its sampled ∞-norm and L² norm"""

    residual: SpectralField
    inf_norm: float
    l2_norm: float


@dataclass(frozen=True, eq=False)
class JacobianMatrix:
    """Dense ∂_u F(ε, u) acting on sine coefficients"""

    matrix: np.ndarray
    params: ModelParams
    base: SpectralField

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        m = self.base.modes
        if matrix.shape != (m, m):
            raise ValueError(f"jacobian shape {matrix.shape} does not match mode count {m}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("jacobian entries must be finite")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def apply(self, v: SpectralField) -> SpectralField:
        return SpectralField(self.matrix @ v.coeffs)


@dataclass(frozen=True)
class NewtonResult:
    u: SpectralField
    converged: bool
    iterations: int
    residual_inf: float
