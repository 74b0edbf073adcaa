"""Gegenbauer operator stack and classical spectral reprojection.

For a grid of N points and parameters (lam, m) the stack consists of

* ``geg_synthesis``  G, N x (m+1), G[j, l] = C_l^lam(x_j)
* ``geg_analysis``   (2/N) H G^T W, the trapezoid-rule Gegenbauer coefficients
* ``bessel_projection`` B, (m+1) x N, mapping Fourier coefficients straight to
  reprojection coefficients through Bessel-function inner products.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import ConfigError
from .fourier import Grid, SpectralData, make_grid
from .specfun import GegParams, bessel_j, gegenbauer_table, geg_norm_h

_I_POWERS = np.array([1, 1j, -1, -1j])


@dataclass(frozen=True, eq=False)
class OperatorSet:
    grid: Grid
    params: GegParams
    geg_synthesis: np.ndarray
    geg_analysis: np.ndarray
    bessel_projection: np.ndarray
    norm_diag: np.ndarray
    weight_diag: np.ndarray
    kappa: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.grid.n

    @cached_property
    def projector(self):
        """A = G (2/N) H G^T W, the discrete Gegenbauer projection on the grid."""
        A = self.geg_synthesis @ self.geg_analysis
        A.setflags(write=False)
        return A

    @cached_property
    def complement(self):
        """M = I - A."""
        M = np.eye(self.n) - self.projector
        M.setflags(write=False)
        return M

    def diagnostics(self):
        """Plain-text summary: shapes, conditioning and the kappa report."""
        cond = np.linalg.cond(self.projector.T @ self.projector + self.complement.T @ self.complement)
        sv = np.linalg.svd(self.projector, compute_uv=False)
        lines = [
            f"n = {self.n}",
            f"m = {self.params.m}",
            f"lambda = {self.params.lam:g}",
            f"geg_synthesis = {self.geg_synthesis.shape[0]}x{self.geg_synthesis.shape[1]}",
            f"geg_analysis = {self.geg_analysis.shape[0]}x{self.geg_analysis.shape[1]}",
            f"bessel_projection = {self.bessel_projection.shape[0]}x{self.bessel_projection.shape[1]}",
            f"projector_rank_singular_value_min = {sv[self.params.m]:.6e}",
            f"normal_matrix_condition = {cond:.6e}",
            f"kappa_lambda = {self.kappa.get('kappa_lambda', float('nan')):.6f}",
            f"kappa_m = {self.kappa.get('kappa_m', float('nan')):.6f}",
            f"kappa_max = {self.kappa.get('kappa_max', float('nan')):.6f}",
            f"kappa_admissible = {self.kappa.get('admissible')}",
        ]
        return "\n".join(lines) + "\n"


def bessel_matrix(n, params):
    """Fourier-to-Gegenbauer coefficient map B of shape (m+1, N).

    Entry (l, k) for k != 0 is Gamma(lam) i^l (l+lam) J_{l+lam}(pi k) (2/(pi k))^lam.
    ``J_{l+lam}(z) z^{-lam}`` has parity (-1)^l, which is how negative k is
    handled.  The Gamma and power factors are combined in log space.
    The k = 0 column is the unit vector e_0.
    """
    lam, m = params.lam, params.m
    if not lam > 0:
        raise ConfigError("lambda must be positive to build the Bessel projection", "lambda")
    ks = np.arange(-n // 2, n // 2)
    absk = np.abs(ks).astype(float)
    nz = absk > 0
    z = np.pi * absk[nz]
    log_prefactor = math.lgamma(lam) + lam * np.log(2.0 / z)
    B = np.zeros((m + 1, n), dtype=complex)
    for l in range(m + 1):
        J = bessel_j(l + lam, z)
        with np.errstate(divide="ignore"):
            mag = np.exp(log_prefactor + np.log(np.abs(J))) * np.sign(J)
        row = (l + lam) * mag * np.where(ks[nz] < 0, (-1.0) ** l, 1.0)
        B[l, nz] = _I_POWERS[l % 4] * row
    B[0, n // 2] = 1.0
    return B


@lru_cache(maxsize=64)
def _build(n, lam, m):
    grid = make_grid(n)
    params = GegParams(lam, m)
    G = gegenbauer_table(m, lam, grid.points)
    norms = np.array([geg_norm_h(l, lam) for l in range(m + 1)])
    H = 1.0 / norms
    with np.errstate(divide="ignore"):
        W = (1.0 - grid.points**2) ** (lam - 0.5)
    CT = (2.0 / n) * (H[:, None] * G.T) * W[None, :]
    B = bessel_matrix(n, params)
    for arr in (G, CT, B, H, W):
        arr.setflags(write=False)
    return OperatorSet(grid, params, G, CT, B, H, W, params.kappa_report(n, warn=False))


def build_operators(grid, params):
    """Materialize the operator stack for ``grid`` and ``params`` (cached per (N, lam, m))."""
    if params.m + 1 > grid.n:
        raise ConfigError(f"m + 1 = {params.m + 1} exceeds N = {grid.n}", "m")
    if not params.lam > 0:
        raise ConfigError("lambda must be positive", "lambda")
    return _build(grid.n, params.lam, params.m)


def _coeffs(data, n):
    b = data.coeffs if isinstance(data, SpectralData) else np.asarray(data, dtype=complex)
    if b.shape != (n,):
        raise ValueError(f"data has length {b.size}, operators expect {n}")
    return b


def project_coeffs(ops, data):
    """Reprojection coefficients Re(B b), one per degree 0..m."""
    return (ops.bessel_projection @ _coeffs(data, ops.n)).real


def gegenbauer_reconstruct(ops, data):
    """Classical spectral reprojection of Fourier data onto the grid."""
    return ops.geg_synthesis @ project_coeffs(ops, data)


def geg_partial_sum(ops, signal):
    """Discrete Gegenbauer projection A f of grid samples ``signal``."""
    f = np.asarray(signal, dtype=float)
    if f.shape != (ops.n,):
        raise ValueError(f"signal has shape {f.shape}, operators expect ({ops.n},)")
    return ops.geg_synthesis @ (ops.geg_analysis @ f)
