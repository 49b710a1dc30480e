from dataclasses import dataclass

from .field import SpectralField


@dataclass(frozen=True)
class BifurcationPoint:
    """Trivial-branch bifurcation datum at σ_k = k^{r−s}.

    eigenfunction is sin(kx); phi is the second-order corrector solving
    Λ^r φ − σ_k Λ^s φ = k sin(2kx) with no sin(kx) component.
    """

    k: int
    r: float
    s: float
    sigma: float
    eigenfunction: SpectralField
    ddot_omega: float
    phi: SpectralField

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if not 0 < self.sigma <= 1:
            raise ValueError(f"sigma must lie in (0, 1], got {self.sigma}")
        if int((self.eigenfunction.coeffs != 0).sum()) != 1:
            raise ValueError("eigenfunction must have exactly one nonzero coefficient")
