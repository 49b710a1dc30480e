from dataclasses import dataclass, replace
import math

import numpy as np


def _frozen_array(values) -> np.ndarray:
    arr = np.atleast_1d(np.array(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Odd 2π-periodic function u(x) = Σ_{k=1..M} a_k sin(kx) on [−π, π).

    Normalization: ‖sin(kx)‖²_{L²} = π. There is no k = 0 term, so every field
    has zero mean.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_array(self.coeffs))

    @classmethod
    def zeros(cls, modes: int) -> "SpectralField":
        if modes < 1:
            raise ValueError(f"modes must be positive, got {modes}")
        return cls(np.zeros(modes))

    @classmethod
    def mode(cls, k: int, modes: int, amplitude: float = 1.0) -> "SpectralField":
        """amplitude * sin(kx)"""
        if not 1 <= k <= modes:
            raise ValueError(f"mode {k} outside 1..{modes}")
        coeffs = np.zeros(modes)
        coeffs[k - 1] = amplitude
        return cls(coeffs)

    @property
    def modes(self) -> int:
        return int(self.coeffs.size)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(1, self.modes + 1, dtype=float)

    def resize(self, modes: int) -> "SpectralField":
        """Truncate or zero-pad to a new mode count"""
        if modes < 1:
            raise ValueError(f"modes must be positive, got {modes}")
        coeffs = np.zeros(modes)
        n = min(modes, self.modes)
        coeffs[:n] = self.coeffs[:n]
        return SpectralField(coeffs)

    def shift(self, k: int = 1) -> "SpectralField":
        """Translate by π/k; the field must be supported on multiples of k"""
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        idx = np.arange(1, self.modes + 1)
        off_lattice = idx % k != 0
        if np.any(self.coeffs[off_lattice] != 0.0):
            raise ValueError(f"field is not supported on multiples of {k}; shift by pi/{k} breaks oddness")
        signs = np.where((idx // k) % 2 == 0, 1.0, -1.0)
        return SpectralField(signs * self.coeffs)

    def inner(self, other: "SpectralField") -> float:
        """L² inner product on [−π, π)"""
        self._check_compatible(other)
        return float(math.pi * np.dot(self.coeffs, other.coeffs))

    def _check_compatible(self, other: "SpectralField"):
        if not isinstance(other, SpectralField):
            raise TypeError(f"expected SpectralField, got {type(other).__name__}")
        if other.modes != self.modes:
            raise ValueError(
                f"mode count mismatch ({self.modes} vs {other.modes}); resize explicitly first"
            )

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(-self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectralField):
            return NotImplemented
        return self.modes == other.modes and bool(np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        return f"<SpectralField(modes={self.modes}, max|a|={float(np.max(np.abs(self.coeffs))):.3e})>"


@dataclass(frozen=True, eq=False)
class CosineField:
    """Even field Σ_{k=1..M} b_k cos(kx); produced by differentiating a SpectralField.

    Kept as a separate type so an even field cannot be passed where an odd one is expected.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_array(self.coeffs))

    @property
    def modes(self) -> int:
        return int(self.coeffs.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CosineField):
            return NotImplemented
        return self.modes == other.modes and bool(np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None


@dataclass(frozen=True)
class ModelParams:
    """(r, s, ε) of u u_x = Λ^r u − ε Λ^s u"""

    r: float
    s: float
    eps: float

    def __post_init__(self):
        for name in ("r", "s", "eps"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.s <= 1:
            raise ValueError(f"s must satisfy s > 1, got s={self.s}")
        if not -1 <= self.r < self.s:
            raise ValueError(f"r must lie in [-1, s), got r={self.r}, s={self.s}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got eps={self.eps}")

    def with_eps(self, eps: float) -> "ModelParams":
        return replace(self, eps=float(eps))
