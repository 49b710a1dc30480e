"""Sine-series representation of odd periodic fields on T = [−π, π).

u(x) = Σ_{k=1..M} a_k sin(kx), with ‖sin(kx)‖²_{L²} = π. Λ^α is diagonal
(a_k → k^α a_k). Physical samples live on x_j = −π + 2πj/N; internally the
transforms run on y_j = 2πj/N and the shift x = y − π is applied as the sign
pattern (−1)^k on the coefficients.
"""
from typing import Optional
import math

import numpy as np
from scipy import fft

from ..config import settings
from ..models.field import CosineField, SpectralField


def _sample_sine(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    """Σ a_k sin(k y_j) on y_j = 2πj/N"""
    m = coeffs.size
    spectrum = np.zeros(n_points // 2 + 1, dtype=complex)
    spectrum[1 : m + 1] = -0.5j * n_points * coeffs
    if n_points % 2 == 0 and m >= n_points // 2:
        # sin(N/2 · y_j) vanishes on the grid
        spectrum[n_points // 2] = 0.0
    return fft.irfft(spectrum, n=n_points)


def _sample_cosine(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    """Σ b_k cos(k y_j) on y_j = 2πj/N"""
    m = coeffs.size
    spectrum = np.zeros(n_points // 2 + 1, dtype=complex)
    spectrum[1 : m + 1] = 0.5 * n_points * coeffs
    if n_points % 2 == 0 and m >= n_points // 2:
        spectrum[n_points // 2] = n_points * coeffs[n_points // 2 - 1]
    return fft.irfft(spectrum, n=n_points)


def _analyse_sine(samples: np.ndarray, modes: int) -> np.ndarray:
    """Discrete sine coefficients of samples on y_j = 2πj/N (odd part only)"""
    n_points = samples.size
    spectrum = fft.rfft(samples)
    coeffs = np.zeros(modes)
    top = min(modes, (n_points - 1) // 2)
    coeffs[:top] = -2.0 / n_points * spectrum[1 : top + 1].imag
    return coeffs


def _alternating(modes: int) -> np.ndarray:
    return np.where(np.arange(1, modes + 1) % 2 == 0, 1.0, -1.0)


def physical_grid(n_points: int) -> np.ndarray:
    """Uniform grid x_j = −π + 2πj/N over [−π, π)"""
    return -math.pi + 2.0 * math.pi * np.arange(n_points) / n_points


def lambda_apply(alpha: float, u: SpectralField) -> SpectralField:
    """Fourier multiplier Λ^α: a_k → k^α a_k"""
    return SpectralField(u.wavenumbers ** alpha * u.coeffs)


def derivative(u: SpectralField) -> CosineField:
    """u_x = Σ k a_k cos(kx)"""
    return CosineField(u.wavenumbers * u.coeffs)


def nonlinear_term(u: SpectralField, dealias_factor: Optional[int] = None) -> SpectralField:
    """Sine coefficients (modes 1..M) of u·u_x.

    The product is formed on a zero-padded grid of dealias_factor·M points. For
    dealias_factor ≥ 4 no product mode above M aliases onto modes 1..M, so the
    Galerkin projection is exact up to rounding.
    """
    factor = dealias_factor or settings.dealias_factor
    if factor < 4:
        raise ValueError(f"dealias_factor must be at least 4, got {factor}")
    m = u.modes
    n_points = factor * m
    values = _sample_sine(u.coeffs, n_points)
    slopes = _sample_cosine(u.wavenumbers * u.coeffs, n_points)
    return SpectralField(_analyse_sine(values * slopes, m))


def sobolev_seminorm(u: SpectralField, t: float) -> float:
    """‖u‖_{Ḣ^t} = (π Σ k^{2t} a_k²)^{1/2}; t = 0 is the L² norm"""
    weights = u.wavenumbers ** (2.0 * t)
    return math.sqrt(math.pi * float(np.dot(weights, u.coeffs ** 2)))


def sobolev_norm(u: SpectralField, t: float) -> float:
    """‖u‖_{H^t} = (‖u‖²_{L²} + ‖u‖²_{Ḣ^t})^{1/2}"""
    return math.hypot(sobolev_seminorm(u, 0.0), sobolev_seminorm(u, t))


def tail_energy_fraction(u: SpectralField, t: float, tail: float = 0.1) -> float:
    """Share of ‖u‖²_{Ḣ^t} carried by the top `tail` fraction of modes"""
    energy = u.wavenumbers ** (2.0 * t) * u.coeffs ** 2
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    start = int(math.floor((1.0 - tail) * u.modes))
    return float(energy[start:].sum()) / total


def to_physical(u: SpectralField, n_points: int) -> np.ndarray:
    """Samples of u on physical_grid(n_points); requires n_points ≥ 2M"""
    if n_points < 2 * u.modes:
        raise ValueError(f"n_points={n_points} is below the Nyquist bound 2M={2 * u.modes}")
    return _sample_sine(_alternating(u.modes) * u.coeffs, n_points)


def to_physical_cosine(v: CosineField, n_points: int) -> np.ndarray:
    """Samples of an even field on physical_grid(n_points)"""
    if n_points < 2 * v.modes:
        raise ValueError(f"n_points={n_points} is below the Nyquist bound 2M={2 * v.modes}")
    return _sample_cosine(_alternating(v.modes) * v.coeffs, n_points)


def from_physical(samples: np.ndarray, modes: int) -> SpectralField:
    """Discrete sine analysis of samples taken on physical_grid(len(samples))"""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2 * modes + 1:
        raise ValueError(f"{samples.size} samples cannot resolve {modes} modes")
    return SpectralField(_alternating(modes) * _analyse_sine(samples, modes))


def dense_points(u: SpectralField, grid_factor: Optional[int] = None) -> int:
    return (grid_factor or settings.grid_factor) * u.modes


def linf_norm(u: SpectralField, grid_factor: Optional[int] = None) -> float:
    """max |u| over a grid of grid_factor·M points.

    This is a lower bound on the true L^∞ norm, tight to grid resolution.
    """
    return float(np.max(np.abs(to_physical(u, dense_points(u, grid_factor)))))


def l2_quadrature(u: SpectralField, n_points: Optional[int] = None) -> float:
    """Trapezoidal ∫ u² dx on the physical grid (exact for N > 2M)"""
    n_points = n_points or dense_points(u)
    samples = to_physical(u, n_points)
    return 2.0 * math.pi / n_points * float(np.dot(samples, samples))
