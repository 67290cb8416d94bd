"""Diverse landmark selection for kernel matrices: exact DPP and k-DPP
sampling, the greedy deterministic k-DPP, DAS, and Nystrom evaluation."""

from .errors import (
    ConfigError,
    ConvergenceFailure,
    DegenerateCutWarning,
    DegenerateStepWarning,
    DetKDPPError,
    EmptyData,
    InvalidBandwidth,
    InvalidKernel,
    NegativeHistogram,
    NumericalBreakdown,
    RankTooLarge,
    SingularBlock,
    SingularKernel,
)
from .kernels import (
    KernelMatrix,
    gaussian_kernel,
    histogram_intersection_kernel,
    precomputed_kernel,
    standardize,
)
from .nystrom import (
    NystromApprox,
    QualityReport,
    log_det_diversity,
    nystrom_approximate,
    quality,
)
from .samplers import (
    GreedyState,
    LandmarkSet,
    das_select,
    deterministic_kdpp,
    greedy_select,
    sample_dpp,
    sample_dpp_batch,
    sample_kdpp,
    sample_kdpp_batch,
    uniform_sample,
)
from .spectral import (
    EigenSystem,
    ProjectorKernel,
    kpca_project,
    leverage_scores,
    max_norm,
    operator_norm,
    ridge_projector,
    sharp_projector,
    sym_eig,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceFailure",
    "DegenerateCutWarning",
    "DegenerateStepWarning",
    "DetKDPPError",
    "EmptyData",
    "InvalidBandwidth",
    "InvalidKernel",
    "NegativeHistogram",
    "NumericalBreakdown",
    "RankTooLarge",
    "SingularBlock",
    "SingularKernel",
    "KernelMatrix",
    "gaussian_kernel",
    "histogram_intersection_kernel",
    "precomputed_kernel",
    "standardize",
    "NystromApprox",
    "QualityReport",
    "log_det_diversity",
    "nystrom_approximate",
    "quality",
    "GreedyState",
    "LandmarkSet",
    "das_select",
    "deterministic_kdpp",
    "greedy_select",
    "sample_dpp",
    "sample_dpp_batch",
    "sample_kdpp",
    "sample_kdpp_batch",
    "uniform_sample",
    "EigenSystem",
    "ProjectorKernel",
    "kpca_project",
    "leverage_scores",
    "max_norm",
    "operator_norm",
    "ridge_projector",
    "sharp_projector",
    "sym_eig",
]
