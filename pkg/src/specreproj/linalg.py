"""Small dense linear-algebra kernel: Cholesky factor/solve and a smallest-eigenvalue estimate."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy.linalg import lapack
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import NotSPDError


@dataclass(frozen=True, eq=False)
class SpdFactorization:
    """Lower Cholesky factor ``lower`` with P = L L^T.

    ``asymmetry`` is max|P - P^T| of the matrix handed to :func:`spd_factor`,
    before it was symmetrized.
    """

    lower: np.ndarray
    asymmetry: float = 0.0

    @property
    def dim(self):
        return self.lower.shape[0]

    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def spd_factor(P, sym_tol=1e-10):
    """Cholesky-factor a symmetric positive definite matrix.

    The input is symmetrized as (P + P^T)/2 first.  Raises
    :class:`~specreproj.errors.NotSPDError` naming the first bad pivot, and
    ``ValueError`` if P is not symmetric to ``sym_tol`` (relative to max|P|).
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {P.shape}")
    asym = float(np.max(np.abs(P - P.T))) if P.size else 0.0
    scale = max(float(np.max(np.abs(P))), 1.0) if P.size else 1.0
    if asym > sym_tol * scale:
        raise ValueError(f"matrix is not symmetric: max|P - P^T| = {asym:.3e}")
    S = 0.5 * (P + P.T)
    L, info = lapack.dpotrf(S, lower=1, clean=1)
    if info > 0:
        raise NotSPDError(info - 1, float(S[info - 1, info - 1]))
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    return SpdFactorization(L, asym)


def spd_solve(fact, rhs):
    """Solve P x = rhs given the factorization of P (rhs may be a matrix)."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != fact.dim:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, factorization has dimension {fact.dim}")
    return sla.cho_solve((fact.lower, True), rhs, check_finite=False)


@dataclass(frozen=True)
class EigEstimate:
    """Eigenvalue estimate; ``iterations`` counts applications of P^-1."""

    value: float
    converged: bool
    iterations: int


def min_eig_estimate(P, tol=1e-6, max_iter=500, seed=0):
    """Smallest eigenvalue of a symmetric matrix by shift-invert iteration.

    The inverse P^-1 is applied through its Cholesky factor inside ARPACK's
    Lanczos loop (shift sigma = 0), which is inverse power iteration with
    Krylov acceleration; plain inverse iteration stalls on the clustered
    spectra of the reprojection normal matrices.  If P is not positive
    definite the factorization fails and the estimate is the non-positive
    Cholesky pivot, flagged ``converged=False``.
    """
    P = np.asarray(P, dtype=float)
    try:
        fact = spd_factor(P)
    except NotSPDError as err:
        return EigEstimate(min(err.value if err.value is not None else 0.0, 0.0), False, 0)
    n = P.shape[0]
    if n <= 2:
        return EigEstimate(float(sla.eigvalsh(P)[0]), True, 1)
    count = [0]

    def apply_inverse(v):
        count[0] += 1
        return spd_solve(fact, np.ravel(v))

    inv = LinearOperator((n, n), matvec=apply_inverse, dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        mu = eigsh(inv, k=1, which="LA", tol=tol, maxiter=max_iter, v0=v0, return_eigenvectors=False)
    except ArpackNoConvergence as err:
        vals = err.eigenvalues
        return EigEstimate(float(1.0 / vals[0]) if len(vals) else float("nan"), False, count[0])
    return EigEstimate(float(1.0 / mu[0]), True, count[0])
