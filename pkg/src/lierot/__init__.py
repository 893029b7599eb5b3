"""One-parameter rotation families on SO(2^k) for rotated and non-uniform constellations."""

__version__ = "0.1.0"

from .channel_objective import (
    Estimate,
    FadingRealization,
    McConfig,
    NoiseSpec,
    awgn_mutual_information,
    cm_capacity,
    conditional_cutoff_rate,
    jensen_rate,
    mean_cutoff_rate,
    sample_fading,
)
from .constellation import (
    Constellation,
    NuqamParams,
    direct_product,
    make_nuqam,
    make_qam,
    normalize_unit_energy,
    rotate,
)
from .lie_rotations import (
    OneParamFamily,
    SkewGenerator,
    build_hadamard,
    build_skew_generator,
    check_rotation,
    exp_skew,
    family_rotation,
    is_rotation,
    realify,
)
from .optimizer import (
    DescentSettings,
    GridSpec,
    LineSearchError,
    OptimizationResult,
    best_rotation_t,
    joint_optimize,
    optimize_alpha,
    snr_sweep,
)

__all__ = [
    "__version__",
    "Estimate",
    "FadingRealization",
    "McConfig",
    "NoiseSpec",
    "awgn_mutual_information",
    "cm_capacity",
    "conditional_cutoff_rate",
    "jensen_rate",
    "mean_cutoff_rate",
    "sample_fading",
    "Constellation",
    "NuqamParams",
    "direct_product",
    "make_nuqam",
    "make_qam",
    "normalize_unit_energy",
    "rotate",
    "OneParamFamily",
    "SkewGenerator",
    "build_hadamard",
    "build_skew_generator",
    "check_rotation",
    "exp_skew",
    "family_rotation",
    "is_rotation",
    "realify",
    "DescentSettings",
    "GridSpec",
    "LineSearchError",
    "OptimizationResult",
    "best_rotation_t",
    "joint_optimize",
    "optimize_alpha",
    "snr_sweep",
]
