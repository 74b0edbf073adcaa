"""BSR and GBSR posteriors: objectives, block-coordinate-descent MAP, fixed-hyperparameter Gaussians.

BSR compares the Gegenbauer projection A f of a candidate signal with the
reprojected data y = G B b.  GBSR fits the Fourier data b directly through the
DFT matrix.  Both share the prior penalty beta/2 ||(I - A) f||^2 and Gamma(c, d)
hyperpriors on the two precisions.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .errors import ConfigError
from .fourier import SpectralData, dft_matrix, fourier_partial_sum, inverse_dft_matrix
from .linalg import spd_factor, spd_solve
from .reprojection import gegenbauer_reconstruct

METHODS = ("bsr", "gbsr")
GBSR_ADJOINTS = ("unnormalized", "normalized")


@dataclass(frozen=True)
class HyperParams:
    """Likelihood precision (gamma, or gamma-tilde for GBSR), prior precision beta,
    and the Gamma hyperprior shape c and rate d."""

    likelihood_precision: float
    prior_precision: float
    shape: float = 1.0
    rate: float = 1e-4

    def __post_init__(self):
        for name in ("likelihood_precision", "prior_precision", "shape"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        # d = 0 is a valid (improper) hyperprior for evaluating the objective
        if not (np.isfinite(self.rate) and self.rate >= 0):
            raise ValueError(f"rate must be non-negative and finite, got {self.rate}")


@dataclass(frozen=True)
class BcdConfig:
    """Stopping rule and hyperprior settings for the BCD iteration.

    ``gbsr_adjoint`` selects the GBSR f-update: ``"normalized"`` uses F^H and
    is the exact minimizer of the GBSR objective in f; ``"unnormalized"`` uses
    F^* = N F^H, which weights the data term N times more heavily.
    """

    rel_tol: float = 1e-8
    max_iter: int = 100
    init_precisions: tuple = (1.0, 1.0)
    shape: float = 1.0
    rate: float = 1e-4
    gbsr_adjoint: str = "normalized"
    dense_gbsr: bool = False

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ConfigError("must be positive", "rel_tol")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError("must be an integer >= 1", "max_iter")
        if len(self.init_precisions) != 2 or min(self.init_precisions) <= 0:
            raise ConfigError("must be two positive reals", "init_precisions")
        if not (self.shape > 0 and self.rate > 0):
            raise ConfigError("hyperprior shape and rate must be positive", "shape/rate")
        if self.gbsr_adjoint not in GBSR_ADJOINTS:
            raise ConfigError(f"must be one of {GBSR_ADJOINTS}", "gbsr_adjoint")


@dataclass
class MapResult:
    estimate: np.ndarray
    hyper: HyperParams
    objective_trace: list
    iterations: int
    converged: bool
    method: str
    # objective after every single block update: (before, after f, after gamma, after beta) per sweep
    block_trace: list = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class CredibleBand:
    lower: np.ndarray
    upper: np.ndarray
    level: float


def _norm2(v):
    return float(np.vdot(v, v).real)


def _check_precisions(gamma, beta):
    if not (gamma > 0 and beta > 0):
        raise ValueError(f"precisions must be positive, got gamma={gamma}, beta={beta}")


# --------------------------------------------------------------------------
# BSR
# --------------------------------------------------------------------------


def bsr_observable(ops, data):
    """The BSR data vector: the spectral reprojection G B b of the Fourier data."""
    return gegenbauer_reconstruct(ops, data)


def bsr_objective(f, hyper, observable, ops):
    """Negative log BSR posterior (up to a constant)."""
    gamma, beta = hyper.likelihood_precision, hyper.prior_precision
    _check_precisions(gamma, beta)
    c, d, n = hyper.shape, hyper.rate, ops.n
    expo = c + n / 2 - 1
    A = ops.projector
    return (
        -expo * math.log(gamma)
        - expo * math.log(beta)
        + 0.5 * gamma * _norm2(observable - A @ f)
        + 0.5 * beta * _norm2(f - A @ f)
        + d * gamma
        + d * beta
    )


def bsr_precision(gamma, beta, ops):
    A, M = ops.projector, ops.complement
    return gamma * (A.T @ A) + beta * (M.T @ M)


def bsr_update_f(hyper, observable, ops):
    """Minimize the BSR objective over f: (gamma A^T A + beta M^T M) f = gamma A^T y."""
    gamma, beta = hyper.likelihood_precision, hyper.prior_precision
    fact = spd_factor(bsr_precision(gamma, beta, ops))
    return spd_solve(fact, gamma * (ops.projector.T @ observable))


def bsr_update_gamma(f, observable, ops, c=1.0, d=1e-4):
    return (2 * c + ops.n - 2) / (_norm2(observable - ops.projector @ f) + 2 * d)


def bsr_update_beta(f, ops, c=1.0, d=1e-4):
    return (2 * c + ops.n - 2) / (_norm2(ops.complement @ f) + 2 * d)


# --------------------------------------------------------------------------
# GBSR
# --------------------------------------------------------------------------


def gbsr_objective(f, hyper, data, ops, F=None):
    """Negative log GBSR posterior (up to a constant).

    The complex data misfit carries no 1/2 and its log coefficient is c+N-1.
    """
    gamma, beta = hyper.likelihood_precision, hyper.prior_precision
    _check_precisions(gamma, beta)
    c, d, n = hyper.shape, hyper.rate, ops.n
    F = dft_matrix(ops.grid) if F is None else F
    b = data.coeffs if isinstance(data, SpectralData) else np.asarray(data, dtype=complex)
    return (
        -(c + n - 1) * math.log(gamma)
        - (c + n / 2 - 1) * math.log(beta)
        + gamma * _norm2(b - F @ f)
        + 0.5 * beta * _norm2(ops.complement @ f)
        + d * gamma
        + d * beta
    )


def _gbsr_adjoint(ops, adjoint):
    """The adjoint used in the f-update, as a dense complex matrix."""
    if adjoint == "unnormalized":
        return inverse_dft_matrix(ops.grid)
    return dft_matrix(ops.grid).conj().T


def gbsr_system(gamma, beta, data, ops, adjoint="normalized", dense=False):
    """Normal matrix and right-hand side of the GBSR f-update.

    With F = DFT matrix, Re(F^H F) = I/N and Re(F^* F) = I exactly, so the
    dense products are only formed when ``dense=True`` (for verification).
    """
    b = data.coeffs if isinstance(data, SpectralData) else np.asarray(data, dtype=complex)
    M = ops.complement
    if dense:
        Fa = _gbsr_adjoint(ops, adjoint)
        gram = (Fa @ dft_matrix(ops.grid)).real
        rhs = 2 * gamma * (Fa @ b).real
    else:
        scale = 1.0 if adjoint == "unnormalized" else 1.0 / ops.n
        gram = scale * np.eye(ops.n)
        rhs = 2 * gamma * scale * fourier_partial_sum(b, ops.grid)
    return 2 * gamma * gram + beta * (M.T @ M), rhs


def gbsr_update_f(hyper, data, ops, adjoint="normalized", dense=False):
    P, rhs = gbsr_system(hyper.likelihood_precision, hyper.prior_precision, data, ops, adjoint, dense)
    return spd_solve(spd_factor(P), rhs)


def gbsr_update_gamma(f, data, ops, c=1.0, d=1e-4):
    b = data.coeffs if isinstance(data, SpectralData) else np.asarray(data, dtype=complex)
    return (c + ops.n - 1) / (_norm2(b - dft_matrix(ops.grid) @ f) + d)


gbsr_update_beta = bsr_update_beta


# --------------------------------------------------------------------------
# block coordinate descent
# --------------------------------------------------------------------------


def _rel_change(new, old):
    return abs(new - old) / max(abs(old), np.finfo(float).tiny)


def _bcd(method, data, ops, cfg):
    c, d = cfg.shape, cfg.rate
    gamma, beta = cfg.init_precisions
    hyper = HyperParams(gamma, beta, c, d)

    if method == "bsr":
        y = bsr_observable(ops, data)
        objective = lambda f, h: bsr_objective(f, h, y, ops)  # noqa: E731
        update_f = lambda h: bsr_update_f(h, y, ops)  # noqa: E731
        update_gamma = lambda f: bsr_update_gamma(f, y, ops, c, d)  # noqa: E731
        f = y.copy()
        degenerate = not np.any(y)
    else:
        F = dft_matrix(ops.grid)
        objective = lambda f, h: gbsr_objective(f, h, data, ops, F)  # noqa: E731
        update_f = lambda h: gbsr_update_f(h, data, ops, cfg.gbsr_adjoint, cfg.dense_gbsr)  # noqa: E731
        update_gamma = lambda f: gbsr_update_gamma(f, data, ops, c, d)  # noqa: E731
        f = fourier_partial_sum(data, ops.grid)
        degenerate = not np.any(data.coeffs)

    if degenerate:
        f = np.zeros(ops.n)
        cap = (2 * c + ops.n - 2) / (2 * d)
        g_cap = cap if method == "bsr" else (c + ops.n - 1) / d
        hyper = HyperParams(g_cap, cap, c, d)
        val = objective(f, hyper)
        return MapResult(f, hyper, [val], 0, True, method, [])

    trace = [objective(f, hyper)]
    blocks = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        sweep = [trace[-1]]
        f_new = update_f(hyper)
        sweep.append(objective(f_new, hyper))
        hyper = replace(hyper, likelihood_precision=update_gamma(f_new))
        sweep.append(objective(f_new, hyper))
        hyper = replace(hyper, prior_precision=bsr_update_beta(f_new, ops, c, d))
        sweep.append(objective(f_new, hyper))
        blocks.append(sweep)

        df = np.linalg.norm(f_new - f) / max(np.linalg.norm(f), np.finfo(float).tiny)
        dj = _rel_change(sweep[-1], trace[-1])
        f = f_new
        trace.append(sweep[-1])
        if dj < cfg.rel_tol or df < cfg.rel_tol:
            converged = True
            break
    return MapResult(f, hyper, trace, it, converged, method, blocks)


def bsr_map(data, ops, cfg=None):
    """BSR MAP estimate by block coordinate descent over (f, gamma, beta)."""
    return _bcd("bsr", data, ops, cfg or BcdConfig())


def gbsr_map(data, ops, cfg=None):
    """GBSR MAP estimate by block coordinate descent over (f, gamma-tilde, beta)."""
    return _bcd("gbsr", data, ops, cfg or BcdConfig())


# --------------------------------------------------------------------------
# fixed-hyperparameter posterior
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PosteriorGaussian:
    """N(mean, precision^-1) with the Cholesky factor of the precision kept alongside."""

    mean: np.ndarray
    precision: np.ndarray
    factor: object

    @property
    def dim(self):
        return self.mean.size

    def covariance(self):
        return spd_solve(self.factor, np.eye(self.dim))

    def marginal_std(self):
        """sqrt(diag(C)) via L^{-1}: diag(C) is the column-wise squared norm of L^{-1}."""
        from scipy.linalg import solve_triangular

        Linv = solve_triangular(self.factor.lower, np.eye(self.dim), lower=True)
        return np.sqrt(np.sum(Linv**2, axis=0))


def fixed_posterior(method, hyper, data, ops, adjoint="normalized", dense=False):
    """Gaussian conditional posterior of f at fixed precisions.

    Its mean coincides with the MAP f-update at the same hyperparameters.
    """
    gamma, beta = hyper.likelihood_precision, hyper.prior_precision
    _check_precisions(gamma, beta)
    if method == "bsr":
        P = bsr_precision(gamma, beta, ops)
        rhs = gamma * (ops.projector.T @ bsr_observable(ops, data))
    elif method == "gbsr":
        P, rhs = gbsr_system(gamma, beta, data, ops, adjoint, dense)
    else:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    P = 0.5 * (P + P.T)
    fact = spd_factor(P)
    mean = spd_solve(fact, rhs)
    P.setflags(write=False)
    return PosteriorGaussian(mean, P, fact)


def sample_posterior(post, n_samples, seed=0):
    """Draw ``n_samples`` samples (rows) as mean + L^-T z, z standard normal."""
    from scipy.linalg import solve_triangular

    if int(n_samples) != n_samples or n_samples < 2:
        raise ValueError(f"n_samples must be an integer >= 2, got {n_samples}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((post.dim, int(n_samples)))
    x = solve_triangular(post.factor.lower, z, lower=True, trans="T")
    return (post.mean[:, None] + x).T


def credible_band(samples, level=0.999):
    """Componentwise equal-tailed empirical credible band from posterior samples."""
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    samples = np.asarray(samples, dtype=float)
    tail = (1 - level) / 2
    lower, upper = np.quantile(samples, [tail, 1 - tail], axis=0)
    return CredibleBand(lower, upper, level)


def analytic_band(post, level=0.999):
    """Exact Gaussian band mean +- z * sqrt(diag(C))."""
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    z = stats.norm.ppf(0.5 + level / 2)
    sd = post.marginal_std()
    return CredibleBand(post.mean - z * sd, post.mean + z * sd, level)
