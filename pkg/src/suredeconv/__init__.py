"""Frame-based deconvolution driven by an unbiased quadratic risk estimate."""

from .degradation import (
    BlurSpec,
    DegradationModel,
    compute_observable_set,
    degrade,
    gamma_for_bsnr,
    make_blur_response,
    pilot_inverse,
)
from .estimators import ElementaryFn, LetSpec, apply_theta, beta_fields, f_blu, f_tanh
from .frames import (
    FrameCoefficients,
    FrameTransform,
    analyze,
    build_frame,
    gamma_bar,
    gamma_bar_cross,
    kappa,
    subband_noise_std,
    synthesize,
)
from .pipeline import (
    ExperimentConfig,
    mad_noise_estimate,
    run_restore,
    run_table,
    snr_db,
    wiener_baseline,
)
from .risk import (
    RiskReport,
    lambda_heuristic,
    select_chi,
    subband_criterion,
    sure_estimate,
    sure_variance_estimate,
)
from .solver import NormalSystem, assemble, optimize_let, solve
from .spectral import dft_forward, dft_inverse, mean_square, project_frequencies
from .stein import check_identity, run_suite

__version__ = "0.1.0"

__all__ = [
    "BlurSpec", "DegradationModel", "ElementaryFn", "ExperimentConfig",
    "FrameCoefficients", "FrameTransform", "LetSpec", "NormalSystem",
    "RiskReport", "analyze", "apply_theta", "assemble", "beta_fields",
    "build_frame", "check_identity", "compute_observable_set", "degrade",
    "dft_forward", "dft_inverse", "f_blu", "f_tanh", "gamma_bar",
    "gamma_bar_cross", "gamma_for_bsnr", "kappa", "lambda_heuristic",
    "mad_noise_estimate", "make_blur_response", "mean_square", "optimize_let",
    "pilot_inverse", "project_frequencies", "run_restore", "run_suite",
    "run_table", "select_chi", "snr_db", "solve", "subband_criterion",
    "subband_noise_std", "sure_estimate", "sure_variance_estimate",
    "synthesize", "wiener_baseline",
]
