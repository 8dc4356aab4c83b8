"""Frechet distance between Gaussian summaries, its mean/trace decomposition,
and the 1/N-extrapolated bias-corrected estimate.

The cross term Tr((S1 S2)^(1/2)) is evaluated through the symmetric product
form S1^(1/2) S2 S1^(1/2), which has the same trace as the literal product
but admits a stable real eigendecomposition.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gstats
from .embedio import EmbeddingSet, GaussianSummary
from .errors import DataError, NumericalError
from .runtime import bounded_ordered_map, resolve_threads

# Eigenvalues may dip this far (relative to the mean eigenvalue) below zero
# and still be treated as roundoff; anything lower signals corrupt input.
EIG_CLAMP_REL = 1e-8
TRACE_CLAMP_WARN_REL = 1e-6


@dataclass
class FdResult:
    """Total Frechet distance and its additive mean/trace decomposition."""

    total: float
    mean_term: float
    trace_term: float


@dataclass
class ExtrapolationResult:
    """Line fit of subsampled FD against 1/N; the intercept is the corrected FD."""

    fd_infinity: float
    slope: float
    sample_sizes: list[int]
    fd_at_n: list[float]
    residuals: list[float] = field(default_factory=list)


def _clamped_eigvals(values: np.ndarray, context: str) -> np.ndarray:
    """Zero out eigenvalues within roundoff of zero; error on real negatives."""
    dim = values.shape[0]
    scale = float(values.sum()) / dim if dim else 0.0
    threshold = EIG_CLAMP_REL * max(scale, 1e-12)
    lowest = float(values.min()) if dim else 0.0
    if lowest < -threshold:
        raise NumericalError(
            f"{context}: eigenvalue {lowest:g} below -{threshold:g}; "
            "input covariance is not PSD"
        )
    return np.maximum(values, 0.0)


def _psd_sqrt(cov: np.ndarray, context: str) -> np.ndarray:
    try:
        vals, vecs = np.linalg.eigh(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{context}: eigendecomposition failed ({exc})") from exc
    vals = _clamped_eigvals(vals, context)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return 0.5 * (root + root.T)


def frechet_distance(g1: GaussianSummary, g2: GaussianSummary) -> FdResult:
    """Frechet distance between two Gaussian summaries.

    Returns the total together with the mean term ||mu1 - mu2||^2 and the
    trace term Tr(S1 + S2 - 2 (S1 S2)^(1/2)); the total is their exact sum.
    """
    if g1.dim != g2.dim:
        raise DataError(f"dimension mismatch ({g1.dim} vs {g2.dim})")
    mean_term = float(np.sum((g1.mean - g2.mean) ** 2))

    tr1 = float(np.trace(g1.cov))
    tr2 = float(np.trace(g2.cov))
    sqrt1 = _psd_sqrt(g1.cov, "first covariance")
    inner = sqrt1 @ g2.cov @ sqrt1
    inner = 0.5 * (inner + inner.T)
    try:
        vals = np.linalg.eigvalsh(inner)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"cross-product eigendecomposition failed ({exc})") from exc
    vals = _clamped_eigvals(vals, "symmetrized cross product")
    trace_cross = float(np.sum(np.sqrt(vals)))

    trace_term = tr1 + tr2 - 2.0 * trace_cross
    if trace_term < 0.0:
        if -trace_term > TRACE_CLAMP_WARN_REL * (tr1 + tr2):
            warnings.warn(
                f"trace term clamped from {trace_term:g} to 0; "
                "summaries may be inconsistent",
                RuntimeWarning,
                stacklevel=2,
            )
        trace_term = 0.0
    return FdResult(total=mean_term + trace_term, mean_term=mean_term, trace_term=trace_term)


def fd_between_sets(a: EmbeddingSet, b: EmbeddingSet) -> FdResult:
    """Frechet distance between the Gaussian fits of two embedding sets."""
    if a.dim != b.dim:
        raise DataError(f"dimension mismatch ({a.dim} vs {b.dim})")
    return frechet_distance(
        gstats.summarize_embeddings(a), gstats.summarize_embeddings(b)
    )


def _draw_rng(seed: int, size_index: int, draw_index: int) -> np.random.Generator:
    # Counter-based generator keyed on (seed, size index, draw index) so the
    # subsample for any (size, draw) cell is independent of evaluation order.
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(size_index, draw_index))
    return np.random.Generator(np.random.Philox(seq))


def extrapolate_fd(
    a: EmbeddingSet,
    b: EmbeddingSet,
    sizes: list[int],
    draws_per_size: int = 5,
    seed: int = 0,
    threads: int | None = None,
) -> ExtrapolationResult:
    """Bias-corrected FD via a least-squares line of subsampled FD against 1/N.

    For each N in ``sizes`` the FD is averaged over ``draws_per_size`` uniform
    subsamples without replacement of both sets; the reported value is the
    1/N -> 0 intercept of the fitted line.
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 3:
        raise DataError(f"need >= 3 sizes for extrapolation, got {len(sizes)}")
    if any(n2 <= n1 for n1, n2 in zip(sizes, sizes[1:])):
        raise DataError("sizes must be strictly increasing")
    if sizes[0] < 2:
        raise DataError("smallest size must be >= 2")
    if sizes[-1] > min(a.count, b.count):
        raise DataError(
            f"sizes exceed available rows (max size {sizes[-1]}, "
            f"counts {a.count} and {b.count})"
        )
    if draws_per_size < 1:
        raise DataError("draws_per_size must be >= 1")

    def one_draw(task):
        size_index, draw_index = task
        n = sizes[size_index]
        rng = _draw_rng(seed, size_index, draw_index)
        idx_a = rng.choice(a.count, size=n, replace=False)
        idx_b = rng.choice(b.count, size=n, replace=False)
        sub_a = EmbeddingSet(a.dim, n, a.data[idx_a], a.source_tag)
        sub_b = EmbeddingSet(b.dim, n, b.data[idx_b], b.source_tag)
        return fd_between_sets(sub_a, sub_b).total

    tasks = [(i, j) for i in range(len(sizes)) for j in range(draws_per_size)]
    totals = list(
        bounded_ordered_map(one_draw, tasks, threads=resolve_threads(threads))
    )
    per_size = np.array(totals, dtype=np.float64).reshape(len(sizes), draws_per_size)
    fd_means = per_size.mean(axis=1)

    inv_n = 1.0 / np.array(sizes, dtype=np.float64)
    slope, intercept = np.polyfit(inv_n, fd_means, 1)
    fitted = intercept + slope * inv_n
    return ExtrapolationResult(
        fd_infinity=float(intercept),
        slope=float(slope),
        sample_sizes=sizes,
        fd_at_n=[float(v) for v in fd_means],
        residuals=[float(v) for v in (fd_means - fitted)],
    )
