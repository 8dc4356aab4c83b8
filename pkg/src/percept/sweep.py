"""Attribute-proportion sweep over counterfactual pairs.

Two sets are built from the same sampled identities; set A takes the
attribute-positive (variant) embedding with probability p_A = (1 + d) / 2 and
set B with p_B = (1 - d) / 2, so their attribute proportions differ by
exactly d while everything else about the two distributions matches. Tracing
the Frechet distance over d in [0, 1] yields one sensitivity curve per
attribute.
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import frechet
from .embedio import EmbeddingSet, PairManifest
from .errors import DataError
from .runtime import bounded_ordered_map, resolve_threads

DEFAULT_DIFF_GRID = tuple(i / 10 for i in range(11))

CSV_COLUMNS = ("attribute", "d", "fd_mean", "fd_std", "mean_term_mean", "trace_term_mean")


@dataclass
class SweepConfig:
    set_size: int = 1000
    draws: int = 10
    diff_grid: tuple = DEFAULT_DIFF_GRID
    seed: int = 0

    def validate(self, manifest: PairManifest) -> None:
        if self.set_size < 2:
            raise DataError(f"set_size must be >= 2, got {self.set_size}")
        if self.set_size > manifest.pair_count:
            raise DataError(
                f"set_size {self.set_size} exceeds pair count {manifest.pair_count}"
            )
        if self.draws < 1:
            raise DataError(f"draws must be >= 1, got {self.draws}")
        grid = list(self.diff_grid)
        if not grid:
            raise DataError("diff_grid must be non-empty")
        if any(d < 0.0 or d > 1.0 for d in grid):
            raise DataError("diff_grid values must lie in [0, 1]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DataError("diff_grid must be strictly increasing")


@dataclass
class SweepPoint:
    d: float
    fd_mean: float
    fd_std: float
    mean_term_mean: float
    trace_term_mean: float


@dataclass
class SweepCurve:
    attribute: str
    points: list[SweepPoint]
    set_size: int
    draws: int
    seed: int = 0


def _round_half_even(x: float) -> int:
    return int(round(x))


def build_mixed_sets(
    manifest: PairManifest,
    d: float,
    set_size: int,
    draw_seed: int,
    *,
    base: np.ndarray | None = None,
    variant: np.ndarray | None = None,
) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Build one (A, B) set pair at proportion difference ``d``.

    Samples ``set_size`` pair indices without replacement, then independently
    assigns the variant row to round-half-even(n * p) identities in each set,
    with p_A = (1 + d) / 2 and p_B = (1 - d) / 2. Both sets reuse the same
    identities; all randomness derives from ``draw_seed``.
    """
    if not 0.0 <= d <= 1.0:
        raise DataError(f"proportion difference must lie in [0, 1], got {d}")
    if set_size > manifest.pair_count:
        raise DataError(
            f"set_size {set_size} exceeds pair count {manifest.pair_count}"
        )
    if base is None:
        base = manifest.load_base().data
    if variant is None:
        variant = manifest.load_variant().data

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(draw_seed))))
    idx = rng.choice(manifest.pair_count, size=set_size, replace=False)

    def mix(p: float, tag: str) -> EmbeddingSet:
        n_pos = _round_half_even(set_size * p)
        pos = rng.choice(set_size, size=n_pos, replace=False)
        data = base[idx].copy()
        data[pos] = variant[idx[pos]]
        return EmbeddingSet(
            dim=manifest.dim, count=set_size, data=data,
            source_tag=f"{manifest.attribute}:{tag}",
        )

    set_a = mix((1.0 + d) / 2.0, "A")
    set_b = mix((1.0 - d) / 2.0, "B")
    return set_a, set_b


def _derive_draw_seed(seed: int, grid_index: int, draw_index: int) -> int:
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(grid_index, draw_index))
    return int(seq.generate_state(1, np.uint64)[0])


def run_sweep(
    manifest: PairManifest,
    cfg: SweepConfig,
    *,
    threads: int | None = None,
) -> SweepCurve:
    """FD statistics over the proportion grid, ``cfg.draws`` draws per point.

    The reported std uses the population divisor (R). Identical inputs give a
    bitwise-identical curve regardless of the worker count.
    """
    cfg.validate(manifest)
    base = manifest.load_base().data
    variant = manifest.load_variant().data
    grid = [float(d) for d in cfg.diff_grid]

    def one_draw(task):
        gi, draw = task
        seed = _derive_draw_seed(cfg.seed, gi, draw)
        set_a, set_b = build_mixed_sets(
            manifest, grid[gi], cfg.set_size, seed, base=base, variant=variant
        )
        return frechet.fd_between_sets(set_a, set_b)

    tasks = [(gi, r) for gi in range(len(grid)) for r in range(cfg.draws)]
    results = list(bounded_ordered_map(one_draw, tasks, resolve_threads(threads)))

    points = []
    for gi, d in enumerate(grid):
        chunk = results[gi * cfg.draws : (gi + 1) * cfg.draws]
        totals = np.array([r.total for r in chunk], dtype=np.float64)
        points.append(
            SweepPoint(
                d=d,
                fd_mean=float(totals.mean()),
                fd_std=float(totals.std(ddof=0)),
                mean_term_mean=float(np.mean([r.mean_term for r in chunk])),
                trace_term_mean=float(np.mean([r.trace_term for r in chunk])),
            )
        )
    return SweepCurve(
        attribute=manifest.attribute,
        points=points,
        set_size=cfg.set_size,
        draws=cfg.draws,
        seed=cfg.seed,
    )


def curve_to_csv(curve: SweepCurve) -> str:
    """Serialize a curve; floats use repr so the text round-trips bit-exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in curve.points:
        writer.writerow(
            [curve.attribute, repr(p.d), repr(p.fd_mean), repr(p.fd_std),
             repr(p.mean_term_mean), repr(p.trace_term_mean)]
        )
    return buf.getvalue()


def write_curve_csv(curve: SweepCurve, destination) -> None:
    Path(destination).write_text(curve_to_csv(curve))


def read_curve_csv(source) -> SweepCurve:
    source = Path(source)
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise DataError(f"{source}: not a sweep-curve CSV (header {header})")
        rows = list(reader)
    if not rows:
        raise DataError(f"{source}: empty sweep curve")
    attribute = rows[0][0]
    points = [
        SweepPoint(
            d=float(r[1]), fd_mean=float(r[2]), fd_std=float(r[3]),
            mean_term_mean=float(r[4]), trace_term_mean=float(r[5]),
        )
        for r in rows
    ]
    return SweepCurve(attribute=attribute, points=points, set_size=0, draws=0)
