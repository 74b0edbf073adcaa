"""Spectral reprojection of noisy Fourier data: classical Gegenbauer, BSR and GBSR."""

from .errors import ConfigError, NotSPDError, NumericalError
from .fourier import (
    Grid,
    NoiseModel,
    SpectralData,
    add_noise,
    dft_forward,
    dft_matrix,
    fourier_partial_sum,
    inv_variance_for_snr,
    inverse_dft_matrix,
    make_grid,
    snr_db,
    synthesize_clean_coeffs,
)
from .inference import (
    BcdConfig,
    CredibleBand,
    HyperParams,
    MapResult,
    PosteriorGaussian,
    analytic_band,
    bsr_map,
    bsr_objective,
    bsr_observable,
    credible_band,
    fixed_posterior,
    gbsr_map,
    gbsr_objective,
    sample_posterior,
)
from .reprojection import (
    OperatorSet,
    build_operators,
    geg_partial_sum,
    gegenbauer_reconstruct,
    project_coeffs,
)
from .specfun import GegParams, bessel_j, gamma_fn, geg_norm_h, gegenbauer_eval, gegenbauer_table, log_gamma

__version__ = "0.1.0"
