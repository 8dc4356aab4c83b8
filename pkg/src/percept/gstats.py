"""Streaming, mergeable mean/covariance estimation over embedding rows.

Single rows go through the numerically stable one-pass update (mean first,
then the comoment with pre- and post-update deviations); blocks of rows are
folded in via the pairwise merge rule, which is what makes sharded/parallel
reduction give the same answer as a sequential pass.
"""

from dataclasses import dataclass

import numpy as np

from .embedio import EmbeddingSet, GaussianSummary
from .errors import DataError


@dataclass
class StatAccumulator:
    """Running count, mean and comoment (sum of outer-product deviations)."""

    dim: int
    count: int
    mean: np.ndarray
    comoment: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> "StatAccumulator":
        if dim <= 0:
            raise DataError(f"dim must be positive, got {dim}")
        return cls(
            dim=dim,
            count=0,
            mean=np.zeros(dim, dtype=np.float64),
            comoment=np.zeros((dim, dim), dtype=np.float64),
        )

    def copy(self) -> "StatAccumulator":
        return StatAccumulator(self.dim, self.count, self.mean.copy(), self.comoment.copy())


def accumulate(acc: StatAccumulator, row) -> StatAccumulator:
    """Fold one row into ``acc`` in place and return it."""
    row = np.asarray(row, dtype=np.float64).reshape(-1)
    if row.shape[0] != acc.dim:
        raise DataError(f"row length {row.shape[0]} does not match dim {acc.dim}")
    if not np.isfinite(row).all():
        raise DataError("row contains non-finite values")
    acc.count += 1
    delta = row - acc.mean
    acc.mean += delta / acc.count
    delta2 = row - acc.mean
    # Averaging the two outer-product orders keeps the comoment exactly
    # symmetric in floating point, not just up to rounding.
    acc.comoment += 0.5 * (np.outer(delta, delta2) + np.outer(delta2, delta))
    return acc


def accumulate_block(acc: StatAccumulator, rows) -> StatAccumulator:
    """Fold a block of rows into ``acc`` via a two-pass block summary + merge.

    Equivalent to accumulating the rows one by one (within roundoff), but runs
    at matrix-multiply speed.
    """
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[1] != acc.dim:
        raise DataError(f"block shape {rows.shape} does not match dim {acc.dim}")
    if rows.shape[0] == 0:
        return acc
    block = rows.astype(np.float64, copy=False)
    if not np.isfinite(block).all():
        raise DataError("block contains non-finite values")
    m = block.shape[0]
    bmean = block.mean(axis=0)
    centered = block - bmean
    bcom = centered.T @ centered
    bcom = 0.5 * (bcom + bcom.T)
    other = StatAccumulator(acc.dim, m, bmean, bcom)
    merged = merge(acc, other)
    acc.count, acc.mean, acc.comoment = merged.count, merged.mean, merged.comoment
    return acc


def merge(a: StatAccumulator, b: StatAccumulator) -> StatAccumulator:
    """Combine two accumulators; equals sequential accumulation of a then b."""
    if a.dim != b.dim:
        raise DataError(f"dimension mismatch in merge ({a.dim} vs {b.dim})")
    if a.count == 0:
        return b.copy()
    if b.count == 0:
        return a.copy()
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    comoment = a.comoment + b.comoment + np.outer(delta, delta) * (a.count * b.count / n)
    return StatAccumulator(a.dim, n, mean, comoment)


def finalize(acc: StatAccumulator) -> GaussianSummary:
    """Produce the unbiased (N-1) Gaussian summary; requires count >= 2."""
    if acc.count < 2:
        raise DataError(f"insufficient samples: need at least 2 rows, have {acc.count}")
    cov = acc.comoment / (acc.count - 1)
    cov = 0.5 * (cov + cov.T)
    summary = GaussianSummary(dim=acc.dim, count=acc.count, mean=acc.mean.copy(), cov=cov)
    summary.validate()
    return summary


def summarize_embeddings(es: EmbeddingSet, block: int = 8192) -> GaussianSummary:
    """Mean/covariance of an embedding set, streamed in fixed-size row blocks.

    The merge tree is a left fold over blocks in row order, so the result is
    reproducible run to run.
    """
    if es.count < 2:
        raise DataError(
            f"insufficient samples: need at least 2 rows, have {es.count}"
        )
    acc = StatAccumulator.empty(es.dim)
    for start in range(0, es.count, block):
        accumulate_block(acc, es.data[start : start + block])
    return finalize(acc)
