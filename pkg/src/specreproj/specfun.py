"""Special functions needed by the reprojection operators.

Gamma and log-Gamma come from the standard library, Bessel functions of the
first kind from :mod:`scipy.special`.  Gegenbauer polynomials and their norms
are evaluated here directly.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigError, NumericalError

# Theorem-style admissibility bound on lambda/N and m/N.
KAPPA_MAX = math.pi * math.e / 27

_GAMMA_MAX_ARG = 171.6


@dataclass(frozen=True)
class GegParams:
    """Gegenbauer reprojection parameters.

    Parameters
    ----------
    lam : float
        weight exponent, the weight is ``(1 - x**2)**(lam - 1/2)``
    m : int
        highest polynomial degree kept
    """

    lam: float
    m: int

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ConfigError(f"must be a finite non-negative real, got {self.lam}", "lambda")
        if int(self.m) != self.m or self.m < 0:
            raise ConfigError(f"must be a non-negative integer, got {self.m}", "m")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "lam", float(self.lam))

    def kappa_report(self, n, warn=True):
        """Ratios lam/N and m/N compared against ``KAPPA_MAX``.

        Exceeding the bound only produces a warning; the reprojection still
        runs, it just loses its exponential-accuracy guarantee.
        """
        report = {
            "n": n,
            "kappa_lambda": self.lam / n,
            "kappa_m": self.m / n,
            "kappa_max": KAPPA_MAX,
        }
        report["admissible"] = report["kappa_lambda"] < KAPPA_MAX and report["kappa_m"] < KAPPA_MAX
        if warn and not report["admissible"]:
            warnings.warn(
                f"lambda/N={report['kappa_lambda']:.4f}, m/N={report['kappa_m']:.4f} "
                f"exceed kappa < {KAPPA_MAX:.4f}",
                stacklevel=2,
            )
        return report


def gamma_fn(x):
    """Gamma function for positive real ``x``.

    Raises ``ValueError`` for ``x <= 0`` and ``OverflowError`` once the value
    no longer fits in a double (x > ~171.6); use :func:`log_gamma` there.
    """
    x = float(x)
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    if x > _GAMMA_MAX_ARG:
        raise OverflowError(f"gamma({x}) overflows double precision; use log_gamma")
    return math.gamma(x)


def log_gamma(x):
    """Natural log of the Gamma function for positive real ``x``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _is_half_integer(nu):
    return (nu - 0.5) == math.floor(nu - 0.5) and nu >= 0.5


def bessel_j(order, arg):
    """Bessel function of the first kind J_order(arg).

    Parameters
    ----------
    order : float
        non-negative real order
    arg : float or array_like
        non-negative argument(s)

    Returns
    -------
    float or numpy.ndarray
        matches the shape of ``arg``

    Notes
    -----
    Half-integer orders go through the spherical Bessel functions, which stay
    accurate at the zeros of sin(x) (e.g. x = pi*k).  Everything else uses
    :func:`scipy.special.jv`.
    """
    nu = float(order)
    x = np.asarray(arg, dtype=float)
    if nu < 0 or not np.isfinite(nu):
        raise ValueError(f"bessel_j requires a finite order >= 0, got {nu}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("bessel_j requires finite arguments >= 0")

    if _is_half_integer(nu):
        n = int(nu - 0.5)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.sqrt(2.0 * x / np.pi) * special.spherical_jn(n, x)
        # sqrt(x) * j_n(x) at x=0 is 0 for every n >= 0 (j_0(0)=1 but sqrt(0)=0)
        out = np.where(x == 0, 0.0, out)
    else:
        out = special.jv(nu, x)

    if not np.all(np.isfinite(out)):
        bad = np.atleast_1d(x)[~np.isfinite(np.atleast_1d(out))]
        raise NumericalError(
            f"bessel_j failed to converge for order {nu} at {bad.size} argument(s), "
            f"first offending argument {bad[0]!r}"
        )
    if out.ndim == 0:
        return float(out)
    return out


def gegenbauer_table(m, lam, x):
    """Evaluate C_0^lam .. C_m^lam at the points ``x`` in one recurrence pass.

    Returns an array of shape ``(len(x), m + 1)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) > 1):
        raise ValueError("Gegenbauer polynomials are evaluated on [-1, 1] only")
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    lam = float(lam)
    table = np.empty((x.size, m + 1))
    table[:, 0] = 1.0
    if m >= 1:
        table[:, 1] = 2.0 * lam * x
    for l in range(2, m + 1):
        table[:, l] = (
            2.0 * (l - 1 + lam) * x * table[:, l - 1] - (l - 2 + 2.0 * lam) * table[:, l - 2]
        ) / l
    return table


def gegenbauer_eval(l, lam, x):
    """Gegenbauer polynomial C_l^lam(x) via the three-term recurrence."""
    if int(l) != l or l < 0:
        raise ValueError(f"degree must be a non-negative integer, got {l}")
    scalar = np.ndim(x) == 0
    vals = gegenbauer_table(int(l), lam, x)[:, int(l)]
    return float(vals[0]) if scalar else vals


def log_gegenbauer_at_one(l, lam):
    """log C_l^lam(1) = log Gamma(l + 2 lam) - log l! - log Gamma(2 lam)."""
    return math.lgamma(l + 2 * lam) - math.lgamma(l + 1) - math.lgamma(2 * lam)


def geg_norm_h(l, lam):
    r"""Squared weighted norm h_l^lam of C_l^lam.

    .. math::
        h_l^\lambda = \sqrt{\pi}\, C_l^\lambda(1)
        \frac{\Gamma(\lambda + 1/2)}{\Gamma(\lambda)\,(l + \lambda)}

    The factor :math:`(l+\lambda)` in the denominator is a plain scalar; a
    Gamma function there would break ``h_0^{1/2} = 2``.  All Gamma factors are
    combined in log space so large ``lam`` does not overflow.
    """
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"geg_norm_h requires lam > 0, got {lam}")
    if int(l) != l or l < 0:
        raise ValueError(f"degree must be a non-negative integer, got {l}")
    log_h = (
        0.5 * math.log(math.pi)
        + log_gegenbauer_at_one(l, lam)
        + math.lgamma(lam + 0.5)
        - math.lgamma(lam)
        - math.log(l + lam)
    )
    return math.exp(log_h)
