"""Adversarial-patch defense via isolation-forest outlier detection and
targeted truncated-SVD dimension reduction.

The pipeline fragments an image into overlapping windows, ranks the
flattened fragments with a from-scratch isolation forest, clusters the
top-ranked outliers by window overlap, and rewrites a square mask around
each cluster center with a low-rank reconstruction.
"""

from .config import (
    DefenseConfig,
    RngStream,
    derive_stream,
    parse_config_file,
    parse_config_text,
    validate_config,
)
from .defense import ClusterReport, DefenseResult, PatchDefender, defend_image
from .diagnostics import (
    DistributionFit,
    GaussianStats,
    adaptive_tolerance_check,
    fit_fragment_distribution,
    fragment_gaussian_stats,
    mahalanobis,
    mahalanobis_profile,
    region_gaussian_stats,
    separation_gap,
)
from .fragmentation import Fragment, FragmentGrid, fragment, fragment_window, windows_overlap
from .iforest import (
    IsolationForest,
    IsolationForestDetector,
    IsolationTree,
    anomaly_score,
    avg_unsuccessful_path,
    build_forest,
    build_tree,
    path_length,
    score_samples,
)
from .metrics import (
    OutcomeRecord,
    affected_ratio,
    depth_error,
    depth_mse,
    localization_overlap,
    recovery_rate,
)
from .neutralization import MaskRegion, TruncationResult, make_mask, neutralize, truncate_channel
from .segregation import (
    AnomalyReport,
    Cluster,
    OutlierSet,
    cluster_center,
    cluster_outliers,
    score_fragments,
    select_outliers,
)
from .synth import PATCH_SIZES, GroundTruth, PatchSpec, gradient_background, inject

__version__ = "0.1.0"

__all__ = [
    "AnomalyReport",
    "Cluster",
    "ClusterReport",
    "DefenseConfig",
    "DefenseResult",
    "DistributionFit",
    "Fragment",
    "FragmentGrid",
    "GaussianStats",
    "GroundTruth",
    "IsolationForest",
    "IsolationForestDetector",
    "IsolationTree",
    "MaskRegion",
    "OutcomeRecord",
    "OutlierSet",
    "PATCH_SIZES",
    "PatchDefender",
    "PatchSpec",
    "RngStream",
    "TruncationResult",
    "adaptive_tolerance_check",
    "affected_ratio",
    "anomaly_score",
    "avg_unsuccessful_path",
    "build_forest",
    "build_tree",
    "cluster_center",
    "cluster_outliers",
    "defend_image",
    "depth_error",
    "depth_mse",
    "derive_stream",
    "fit_fragment_distribution",
    "fragment",
    "fragment_gaussian_stats",
    "fragment_window",
    "gradient_background",
    "inject",
    "localization_overlap",
    "mahalanobis",
    "mahalanobis_profile",
    "make_mask",
    "neutralize",
    "parse_config_file",
    "parse_config_text",
    "path_length",
    "recovery_rate",
    "region_gaussian_stats",
    "score_fragments",
    "score_samples",
    "select_outliers",
    "separation_gap",
    "truncate_channel",
    "validate_config",
    "windows_overlap",
]
