"""Uniform grid, discrete Fourier operators, data synthesis and SNR calibration.

Fourier coefficients are stored in the order k = -N/2, ..., N/2 - 1, so the
k = 0 coefficient sits at index N/2.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid x_j = -1 + 2 j / N, j = 0..N-1 (right endpoint excluded)."""

    n: int
    points: np.ndarray

    def __len__(self):
        return self.n

    @property
    def wavenumbers(self):
        return np.arange(-self.n // 2, self.n // 2)

    def nearest_index(self, x):
        return int(np.argmin(np.abs(self.points - x)))


def make_grid(n):
    """Build the N-point uniform grid on [-1, 1).

    >>> make_grid(4).points
    array([-1. , -0.5,  0. ,  0.5])
    """
    if int(n) != n or n < 4 or n % 2:
        raise ConfigError(f"must be an even integer >= 4, got {n}", "n")
    n = int(n)
    pts = -1.0 + 2.0 * np.arange(n) / n
    pts.setflags(write=False)
    return Grid(n, pts)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Fourier coefficients indexed k = -N/2 .. N/2 - 1."""

    coeffs: np.ndarray
    kind: str = "clean"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2:
            raise ConfigError("coefficient vector must be one-dimensional with even length", "coeffs")
        if self.kind not in ("clean", "noisy"):
            raise ConfigError(f"unknown kind {self.kind!r}", "kind")
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self):
        return self.coeffs.size

    @property
    def wavenumbers(self):
        return np.arange(-self.n // 2, self.n // 2)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class NoiseModel:
    """Complex Gaussian noise with total variance ``inv_variance`` (alpha^-1)."""

    inv_variance: float
    seed: int = 0

    def __post_init__(self):
        if not self.inv_variance >= 0 or not np.isfinite(self.inv_variance):
            raise ConfigError(f"must be finite and >= 0, got {self.inv_variance}", "inv_variance")


@lru_cache(maxsize=32)
def _dft_matrix(n):
    grid = make_grid(n)
    phase = np.outer(grid.wavenumbers, grid.points) * np.pi
    mat = np.exp(-1j * phase) / n
    mat.setflags(write=False)
    return mat


def dft_matrix(grid):
    """F with F[n, j] = exp(-i k_n pi x_j) / N, shape (N, N)."""
    return _dft_matrix(grid.n)


def inverse_dft_matrix(grid):
    """Un-normalized adjoint F^* = N F^H, entries exp(i k_n pi x_j)."""
    return grid.n * dft_matrix(grid).conj().T


def _values(signal, grid):
    f = np.asarray(signal, dtype=float)
    if f.shape != (grid.n,):
        raise ValueError(f"signal has shape {f.shape}, grid expects ({grid.n},)")
    return f


def dft_forward(signal, grid):
    """Trapezoid-rule Fourier coefficients F f of samples on ``grid``."""
    return SpectralData(dft_matrix(grid) @ _values(signal, grid), "clean")


def fourier_partial_sum(data, grid):
    """Real part of F^* b, the Fourier partial sum sampled on the grid.

    Noise breaks the conjugate symmetry of the coefficients, so the raw sum is
    complex; only the real part is returned.
    """
    b = data.coeffs if isinstance(data, SpectralData) else np.asarray(data, dtype=complex)
    if b.shape != (grid.n,):
        raise ValueError(f"data has length {b.size}, grid has {grid.n} points")
    return (inverse_dft_matrix(grid) @ b).real


def synthesize_clean_coeffs(func, n, refine=8):
    """Fourier coefficients of ``func`` by the trapezoid rule on a refined mesh.

    The rule runs on ``refine * n`` uniform points; the coefficients
    k = -n/2 .. n/2 - 1 are kept.  ``refine=1`` reproduces
    :func:`dft_forward` of the sampled function.
    """
    if int(refine) != refine or refine < 1:
        raise ConfigError(f"must be a positive integer, got {refine}", "refine")
    grid = make_grid(n)
    fine = -1.0 + 2.0 * np.arange(refine * n) / (refine * n)
    vals = np.asarray(func(fine), dtype=float) * np.ones_like(fine)
    phase = np.exp(-1j * np.pi * np.outer(grid.wavenumbers, fine))
    return SpectralData(phase @ vals / fine.size, "clean")


def add_noise(data, noise):
    """Add seeded circular complex Gaussian noise of total variance alpha^-1.

    Real and imaginary parts are each N(0, alpha^-1 / 2).  The same
    ``(data, noise)`` pair always gives the same output.
    """
    rng = np.random.default_rng(noise.seed)
    scale = np.sqrt(noise.inv_variance / 2.0)
    eps = scale * (rng.standard_normal(data.n) + 1j * rng.standard_normal(data.n))
    return SpectralData(data.coeffs + eps, "noisy")


def snr_db(clean, inv_variance):
    """SNR = 10 log10(||F f||^2 / (N alpha^-1)) in decibels."""
    if not inv_variance > 0:
        raise ValueError(f"noise variance must be positive, got {inv_variance}")
    power = float(np.sum(np.abs(clean.coeffs) ** 2))
    return 10.0 * np.log10(power / (clean.n * inv_variance))


def inv_variance_for_snr(clean, snr):
    """Noise variance alpha^-1 giving the requested SNR (dB) for ``clean``."""
    power = float(np.sum(np.abs(clean.coeffs) ** 2))
    if not power > 0:
        raise ValueError("clean coefficients have zero energy; SNR is undefined")
    return power / (clean.n * 10.0 ** (snr / 10.0))
