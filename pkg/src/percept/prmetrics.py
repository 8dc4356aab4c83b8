"""kNN-manifold precision and recall between a real and a generated set.

Precision is the fraction of generated rows lying inside the union of
k-nearest-neighbor balls of the real rows; recall swaps the roles. Pairwise
distances run through the expansion ||a-b||^2 = ||a||^2 + ||b||^2 - 2 a.b in
blocked float64 matrix products, but every decision that could be affected by
expansion roundoff (the k-th-neighbor radii themselves, and memberships near
a ball boundary) is re-evaluated with the direct subtract-square-sum form, so
the blocked path decides exactly like a brute-force double loop.
"""

from dataclasses import dataclass

import numpy as np

from .embedio import EmbeddingSet
from .errors import DataError
from .runtime import bounded_ordered_map, resolve_threads

DEFAULT_BUDGET_BYTES = 4 << 30

# Extra candidates kept beyond k when selecting nearest neighbors from
# expanded distances; the k-th value is then taken from direct-form distances
# over this window.
_CANDIDATE_PAD = 5

# Membership band: |d^2 - r^2| <= 2e-4 * r^2 (the 1e-4 relative band on the
# distance, doubled for the squared domain) plus an absolute cushion scaled
# by the squared norms, which covers r = 0 (duplicate-point) thresholds.
_BAND_REL = 2e-4
_BAND_ABS = 1e-9


@dataclass
class PrResult:
    precision: float
    recall: float
    k: int


def _exact_sq_dist(a32: np.ndarray, b32: np.ndarray) -> float:
    d = a32.astype(np.float64) - b32.astype(np.float64)
    return float(np.sum(d * d))


def _block_ranges(n: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def _plan_block_rows(dim: int, budget_bytes: int, threads: int) -> int:
    """Rows per block so in-flight buffers stay within the byte budget.

    Per job: two float64 casts (16*B*dim bytes) plus the distance block and
    selection temps (~24*B^2 bytes).
    """
    per_job = max(budget_bytes // max(threads, 1), 32 << 20)
    a, b, c = 24.0, 16.0 * dim, -float(per_job)
    rows = int((-b + (b * b - 4 * a * c) ** 0.5) / (2 * a))
    return max(256, min(4096, rows))


def _sq_norms(data: np.ndarray, block_rows: int) -> np.ndarray:
    out = np.empty(data.shape[0], dtype=np.float64)
    for s, e in _block_ranges(data.shape[0], block_rows):
        x = data[s:e].astype(np.float64)
        out[s:e] = np.einsum("ij,ij->i", x, x)
    return out


def _row_smallest(d2: np.ndarray, window: int, col_offset: int):
    """Per-row smallest ``window`` values of a distance block, with global indices."""
    rows, cols = d2.shape
    if cols <= window:
        idx = np.broadcast_to(np.arange(cols, dtype=np.int64), (rows, cols)).copy()
        idx += col_offset
        return d2.copy(), idx
    part = np.argpartition(d2, window - 1, axis=1)[:, :window]
    vals = np.take_along_axis(d2, part, axis=1)
    return vals, part.astype(np.int64) + col_offset


def _merge_candidates(cand_val, cand_idx, row_range, new_val, new_idx, window):
    s, e = row_range
    vals = np.concatenate([cand_val[s:e], new_val], axis=1)
    idxs = np.concatenate([cand_idx[s:e], new_idx], axis=1)
    if vals.shape[1] > window:
        part = np.argpartition(vals, window - 1, axis=1)[:, :window]
        vals = np.take_along_axis(vals, part, axis=1)
        idxs = np.take_along_axis(idxs, part, axis=1)
    cand_val[s:e] = vals
    cand_idx[s:e] = idxs


def _self_kth_sq(
    data: np.ndarray,
    k: int,
    *,
    block_rows: int,
    threads: int,
) -> np.ndarray:
    """Exact squared distance from each row to its k-th nearest other row.

    Candidates are gathered from expanded distances over the upper triangle
    of block pairs (each off-diagonal product feeds both blocks' rows), then
    the k-th value is recomputed in direct form over the candidate window.
    """
    n = data.shape[0]
    window = min(k + _CANDIDATE_PAD, n - 1)
    norms = _sq_norms(data, block_rows)
    cand_val = np.full((n, window), np.inf, dtype=np.float64)
    cand_idx = np.full((n, window), -1, dtype=np.int64)
    ranges = _block_ranges(n, block_rows)
    pairs = [(i, j) for i in range(len(ranges)) for j in range(i, len(ranges))]

    def job(pair):
        bi, bj = pair
        si, ei = ranges[bi]
        sj, ej = ranges[bj]
        xi = data[si:ei].astype(np.float64)
        xj = xi if bi == bj else data[sj:ej].astype(np.float64)
        d2 = norms[si:ei, None] + norms[None, sj:ej] - 2.0 * (xi @ xj.T)
        np.maximum(d2, 0.0, out=d2)
        if bi == bj:
            np.fill_diagonal(d2, np.inf)
        vi, ii = _row_smallest(d2, window, sj)
        if bi == bj:
            return bi, vi, ii, bj, None, None
        vj, ij = _row_smallest(np.ascontiguousarray(d2.T), window, si)
        return bi, vi, ii, bj, vj, ij

    for bi, vi, ii, bj, vj, ij in bounded_ordered_map(job, pairs, threads):
        _merge_candidates(cand_val, cand_idx, ranges[bi], vi, ii, window)
        if vj is not None:
            _merge_candidates(cand_val, cand_idx, ranges[bj], vj, ij, window)

    r2 = np.empty(n, dtype=np.float64)
    exact = np.empty(window, dtype=np.float64)
    for i in range(n):
        idx = cand_idx[i]
        a = data[i]
        for t in range(window):
            exact[t] = _exact_sq_dist(a, data[idx[t]])
        exact.sort()
        r2[i] = exact[k - 1]
    return r2


def _membership_pass(
    gen_data: np.ndarray,
    real_data: np.ndarray,
    r2_gen: np.ndarray,
    r2_real: np.ndarray,
    *,
    block_rows: int,
    threads: int,
) -> tuple[float, float]:
    """One blocked sweep over gen x real deciding both precision and recall."""
    n_gen, n_real = gen_data.shape[0], real_data.shape[0]
    gen_norms = _sq_norms(gen_data, block_rows)
    real_norms = _sq_norms(real_data, block_rows)
    gen_in = np.zeros(n_gen, dtype=bool)
    real_in = np.zeros(n_real, dtype=bool)
    g_ranges = _block_ranges(n_gen, block_rows)
    r_ranges = _block_ranges(n_real, block_rows)
    pairs = [(gi, rj) for gi in range(len(g_ranges)) for rj in range(len(r_ranges))]

    def decide(d2, thr, norms_sum, rows_a32, cols_a32):
        inside = d2 <= thr
        band = _BAND_REL * thr + _BAND_ABS * norms_sum
        near = np.abs(d2 - thr) <= band
        for u, v in np.argwhere(near):
            exact = _exact_sq_dist(rows_a32[u], cols_a32[v])
            inside[u, v] = exact <= thr[u, v]
        return inside

    def job(pair):
        gi, rj = pair
        gs, ge = g_ranges[gi]
        rs, re = r_ranges[rj]
        # Pruning fully-decided blocks only removes redundant ORs; the
        # result is unchanged regardless of merge timing.
        if gen_in[gs:ge].all() and real_in[rs:re].all():
            return gs, ge, None, rs, re, None
        xg = gen_data[gs:ge].astype(np.float64)
        xr = real_data[rs:re].astype(np.float64)
        d2 = gen_norms[gs:ge, None] + real_norms[None, rs:re] - 2.0 * (xg @ xr.T)
        np.maximum(d2, 0.0, out=d2)
        norms_sum = gen_norms[gs:ge, None] + real_norms[None, rs:re]
        in_real = decide(
            d2,
            np.broadcast_to(r2_real[rs:re], d2.shape),
            norms_sum,
            gen_data[gs:ge],
            real_data[rs:re],
        )
        in_gen = decide(
            d2.T,
            np.broadcast_to(r2_gen[gs:ge], d2.T.shape),
            norms_sum.T,
            real_data[rs:re],
            gen_data[gs:ge],
        )
        return gs, ge, in_real.any(axis=1), rs, re, in_gen.any(axis=1)

    for gs, ge, prec_part, rs, re, rec_part in bounded_ordered_map(job, pairs, threads):
        if prec_part is not None:
            gen_in[gs:ge] |= prec_part
        if rec_part is not None:
            real_in[rs:re] |= rec_part

    return float(np.mean(gen_in)), float(np.mean(real_in))


def manifold_radii(
    es: EmbeddingSet,
    k: int,
    *,
    threads: int | None = None,
    budget_bytes: int = DEFAULT_BUDGET_BYTES,
    block_rows: int | None = None,
) -> np.ndarray:
    """Distance from each row to its k-th nearest neighbor within the set.

    The row itself is excluded; exact-duplicate rows count as neighbors at
    distance zero. Ties in distance do not affect the returned values.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if es.count <= k:
        raise DataError(f"need more than k={k} rows, have {es.count}")
    threads = resolve_threads(threads)
    if block_rows is None:
        block_rows = _plan_block_rows(es.dim, budget_bytes, threads)
    r2 = _self_kth_sq(es.data, k, block_rows=block_rows, threads=threads)
    return np.sqrt(r2)


def precision_recall(
    real: EmbeddingSet,
    gen: EmbeddingSet,
    k: int = 3,
    *,
    threads: int | None = None,
    budget_bytes: int = DEFAULT_BUDGET_BYTES,
    block_rows: int | None = None,
) -> PrResult:
    """kNN-manifold precision and recall of ``gen`` against ``real``.

    Membership uses <=, so a point exactly on a ball boundary counts as
    inside. Swapping the arguments swaps precision and recall exactly.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if real.dim != gen.dim:
        raise DataError(f"dimension mismatch ({real.dim} vs {gen.dim})")
    if real.count <= k or gen.count <= k:
        raise DataError(
            f"need more than k={k} rows in both sets "
            f"(have {real.count} and {gen.count})"
        )
    threads = resolve_threads(threads)
    if block_rows is None:
        block_rows = _plan_block_rows(real.dim, budget_bytes, threads)
    r2_real = _self_kth_sq(real.data, k, block_rows=block_rows, threads=threads)
    r2_gen = _self_kth_sq(gen.data, k, block_rows=block_rows, threads=threads)
    precision, recall = _membership_pass(
        gen.data, real.data, r2_gen, r2_real, block_rows=block_rows, threads=threads
    )
    return PrResult(precision=precision, recall=recall, k=k)
