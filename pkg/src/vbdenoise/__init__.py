"""Blind image denoising with diffusion priors and per-pixel variational
noise-precision inference."""

from .degradations import NoiseSpec, corrupt, nearest_observed_fill, parse_noise_spec, rggb_mask
from .errors import (
    CodecError,
    ConfigurationError,
    DomainError,
    GridRangeError,
    NumericalError,
    UnsupportedResolutionError,
    VbdenoiseError,
    WeightsFormatError,
)
from .imageio import from_unit, load_image, save_image, to_unit
from .metrics import psnr, ssim
from .oracle import (
    GridPosterior,
    GridSpec,
    ScalarProblem,
    grid_joint_posterior,
    grid_posterior_auto,
    standard_battery,
    vb_vs_oracle_report,
)
from .priors import (
    GaussianMixtureEpsilon,
    GaussianMixturePrior,
    MixtureComponent,
    ZeroEpsilon,
    single_gaussian_prior,
)
from .restore import (
    RestorationConfig,
    RestorationResult,
    StepRecord,
    demosaic,
    denoise,
    gamma_prior_at,
    gaussian_kernel,
    map_combine,
    recorrupt,
    rectify_variance,
)
from .sampling import mu_theta, predict_x0_from_eps, sample_unconditional
from .schedule import DiffusionSchedule, build_schedule
from .tiny_net import TinyConvEpsilon, TinyPredictorWeights, random_tiny_weights
from .variational import (
    CaviResult,
    GammaField,
    GaussianField,
    StepProblem,
    cavi,
    free_energy,
    update_gphi,
    update_gx,
)
from .weights_io import load_parity_vectors, load_tiny_predictor, read_tiny_weights, write_tiny_weights

__version__ = "0.1.0"
