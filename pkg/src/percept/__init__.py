"""Metrics engine for feature-space sensitivity analysis.

Computes Fréchet distance (with mean/trace decomposition and 1/N bias
correction), kNN-manifold precision/recall, attribute proportion sweeps
over counterfactual pairs, and region-blur reports, over embedding corpora
stored in the EMB1/GSS1 binary formats.
"""

from .blur import (
    BlurParams,
    RegionReport,
    RegionSpec,
    blur_region,
    gaussian_blur,
    region_fd_report,
    region_present,
)
from .embedio import (
    EmbeddingSet,
    GaussianSummary,
    PairManifest,
    read_embeddings,
    read_manifest,
    read_summary,
    write_embeddings,
    write_manifest,
    write_summary,
)
from .errors import DataError, NumericalError, PerceptError, UsageError
from .frechet import (
    ExtrapolationResult,
    FdResult,
    extrapolate_fd,
    fd_between_sets,
    frechet_distance,
)
from .gstats import (
    StatAccumulator,
    accumulate,
    finalize,
    merge,
    summarize_embeddings,
)
from .prmetrics import PrResult, manifold_radii, precision_recall
from .report import (
    Leaderboard,
    LeaderboardEntry,
    PlotStyle,
    build_leaderboard,
    render_curve,
)
from .sweep import SweepConfig, SweepCurve, SweepPoint, build_mixed_sets, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BlurParams",
    "DataError",
    "EmbeddingSet",
    "ExtrapolationResult",
    "FdResult",
    "GaussianSummary",
    "Leaderboard",
    "LeaderboardEntry",
    "NumericalError",
    "PairManifest",
    "PerceptError",
    "PlotStyle",
    "PrResult",
    "RegionReport",
    "RegionSpec",
    "StatAccumulator",
    "SweepConfig",
    "SweepCurve",
    "SweepPoint",
    "UsageError",
    "accumulate",
    "blur_region",
    "build_leaderboard",
    "build_mixed_sets",
    "extrapolate_fd",
    "fd_between_sets",
    "finalize",
    "frechet_distance",
    "gaussian_blur",
    "manifold_radii",
    "merge",
    "precision_recall",
    "read_embeddings",
    "read_manifest",
    "read_summary",
    "region_fd_report",
    "region_present",
    "render_curve",
    "run_sweep",
    "summarize_embeddings",
    "write_embeddings",
    "write_manifest",
    "write_summary",
]
