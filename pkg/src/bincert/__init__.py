"""Certified robustness of smoothed classifiers over binary vectors.

Smooth any deterministic black-box classifier with independent bit-flip
noise (each bit kept with probability beta) and compute the largest
number K of coordinate flips that provably cannot change the smoothed
prediction, given only a lower bound on the top label's probability and
an upper bound on the runner-up's. The bound is tight: a worst-case
classifier consistent with those two numbers flips at K+1.
"""

from .bitspace import (
    DimensionMismatch,
    FlipMask,
    Label,
    NoiseSpec,
    StructureVector,
    hamming,
    noise_stream,
    sample_noise,
    xor_apply,
)
from .bounds import (
    ConfidenceBounds,
    LabelCounts,
    beta_quantile,
    regularized_incomplete_beta,
    simultaneous_bounds,
)
from .certify import (
    Abstain,
    Certificate,
    RegionSplit,
    bound_pair,
    build_region_split,
    certified_perturbation_size,
    check_radius,
)
from .numerics import EXACT, FLOAT, NumericBackend, resolve_backend
from .oracle import (
    ExactDistribution,
    build_worst_case,
    enumerate_region_probs,
    exact_smoothed_distribution,
    verify_region_bounds,
)
from .regions import (
    RegionProbabilities,
    density_ratio,
    prob_x_region,
    prob_y_region,
    ranked_regions,
    region_size,
    t_coefficient,
)
from .smoothing import (
    BaseClassifier,
    SmoothingRun,
    certify_example,
    smoothed_predict,
    smoothing_run,
)

__version__ = "0.1.0"

__all__ = [
    "Abstain",
    "BaseClassifier",
    "Certificate",
    "ConfidenceBounds",
    "DimensionMismatch",
    "EXACT",
    "ExactDistribution",
    "FLOAT",
    "FlipMask",
    "Label",
    "LabelCounts",
    "NoiseSpec",
    "NumericBackend",
    "RegionProbabilities",
    "RegionSplit",
    "SmoothingRun",
    "StructureVector",
    "beta_quantile",
    "bound_pair",
    "build_region_split",
    "build_worst_case",
    "certified_perturbation_size",
    "certify_example",
    "check_radius",
    "density_ratio",
    "enumerate_region_probs",
    "exact_smoothed_distribution",
    "hamming",
    "noise_stream",
    "prob_x_region",
    "prob_y_region",
    "ranked_regions",
    "region_size",
    "regularized_incomplete_beta",
    "resolve_backend",
    "sample_noise",
    "simultaneous_bounds",
    "smoothed_predict",
    "smoothing_run",
    "t_coefficient",
    "verify_region_bounds",
    "xor_apply",
    "__version__",
]
