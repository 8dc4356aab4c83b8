"""Embedding, Gaussian-summary, and pair-manifest file formats.

Binary layouts (all little-endian, fixed regardless of platform):

* EMB1 embedding file: magic ``EMB1``, u32 dim, u64 count, then
  ``count * dim`` float32 values in row-major order.
* GSS1 summary file: magic ``GSS1``, u32 dim, u64 count, then ``dim``
  float64 mean values followed by ``dim * dim`` float64 covariance values
  in row-major order.

Manifests are JSON documents pairing two row-aligned embedding files for one
binary attribute. Embeddings are stored in float32; all statistics downstream
are computed in float64.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

EMB_MAGIC = b"EMB1"
GSS_MAGIC = b"GSS1"
_EMB_HEADER = struct.Struct("<4sIQ")

# Rows validated per chunk so the reader never holds more than a constant
# amount of scratch on top of the payload itself.
_CHECK_CHUNK_VALUES = 1 << 20


@dataclass(eq=False)
class EmbeddingSet:
    """An N x D matrix of float32 feature vectors for one image set."""

    dim: int
    count: int
    data: np.ndarray
    source_tag: str = ""

    @classmethod
    def from_array(cls, data, source_tag: str = "") -> "EmbeddingSet":
        arr = np.ascontiguousarray(np.asarray(data, dtype="<f4"))
        if arr.ndim != 2:
            raise DataError(f"embedding data must be 2-D, got shape {arr.shape}")
        out = cls(dim=arr.shape[1], count=arr.shape[0], data=arr, source_tag=source_tag)
        out.validate()
        return out

    def validate(self) -> None:
        if self.dim <= 0:
            raise DataError(f"dim must be positive, got {self.dim}")
        if self.count < 0:
            raise DataError(f"count must be non-negative, got {self.count}")
        if self.data.shape != (self.count, self.dim):
            raise DataError(
                f"data shape {self.data.shape} does not match count x dim "
                f"({self.count} x {self.dim})"
            )
        _check_finite(self.data)


@dataclass
class GaussianSummary:
    """Sample count, mean and covariance of one embedding set (float64)."""

    dim: int
    count: int
    mean: np.ndarray
    cov: np.ndarray

    def validate(self) -> None:
        if self.mean.shape != (self.dim,) or self.cov.shape != (self.dim, self.dim):
            raise DataError(
                f"summary shapes mean{self.mean.shape} cov{self.cov.shape} "
                f"do not match dim {self.dim}"
            )
        if not np.isfinite(self.mean).all() or not np.isfinite(self.cov).all():
            raise DataError("summary contains non-finite values")
        asym = float(np.max(np.abs(self.cov - self.cov.T))) if self.dim else 0.0
        scale = float(np.max(np.abs(self.cov))) if self.dim else 0.0
        if asym > 1e-9 * max(scale, 1e-300):
            raise DataError(f"covariance is not symmetric (max asymmetry {asym:g})")


@dataclass
class PairManifest:
    """Row-aligned counterfactual (base, variant) embedding pair for one attribute."""

    attribute: str
    base_ref: Path
    variant_ref: Path
    pair_count: int
    dim: int

    def load_base(self) -> EmbeddingSet:
        return read_embeddings(self.base_ref)

    def load_variant(self) -> EmbeddingSet:
        return read_embeddings(self.variant_ref)


def _check_finite(data: np.ndarray) -> None:
    """Reject NaN/Inf, reporting the first offending (row, col). Chunked scan."""
    flat = data.reshape(-1)
    dim = data.shape[1] if data.ndim == 2 and data.shape[1] else 1
    for start in range(0, flat.size, _CHECK_CHUNK_VALUES):
        chunk = flat[start : start + _CHECK_CHUNK_VALUES]
        if not np.isfinite(chunk).all():
            off = start + int(np.flatnonzero(~np.isfinite(chunk))[0])
            raise DataError(f"non-finite value at row {off // dim}, col {off % dim}")


def write_embeddings(es: EmbeddingSet, destination) -> None:
    """Write an EMB1 file. Round-trips bit-exactly through read_embeddings."""
    es.validate()
    destination = Path(destination)
    payload = np.ascontiguousarray(es.data, dtype="<f4")
    with open(destination, "wb") as fh:
        fh.write(_EMB_HEADER.pack(EMB_MAGIC, es.dim, es.count))
        payload.tofile(fh)


def read_embeddings(source, source_tag: str | None = None) -> EmbeddingSet:
    """Read and validate an EMB1 file."""
    source = Path(source)
    dim, count = read_embedding_header(source)
    expected = count * dim
    with open(source, "rb") as fh:
        fh.seek(_EMB_HEADER.size)
        data = np.fromfile(fh, dtype="<f4", count=expected)
        if data.size < expected:
            raise DataError(
                f"{source}: truncated: expected N*D values "
                f"({expected}), found {data.size}"
            )
        if fh.read(1):
            raise DataError(f"{source}: trailing bytes after payload")
    data = data.reshape(count, dim)
    es = EmbeddingSet(
        dim=dim,
        count=count,
        data=data,
        source_tag=source_tag if source_tag is not None else source.stem,
    )
    es.validate()
    return es


def read_embedding_header(source) -> tuple[int, int]:
    """Read (dim, count) from an EMB1 header without touching the payload."""
    source = Path(source)
    if not source.is_file():
        raise DataError(f"embedding file not found: {source}")
    with open(source, "rb") as fh:
        head = fh.read(_EMB_HEADER.size)
    if len(head) < _EMB_HEADER.size:
        raise DataError(f"{source}: file too short for an EMB1 header")
    magic, dim, count = _EMB_HEADER.unpack(head)
    if magic != EMB_MAGIC:
        raise DataError(f"{source}: unrecognized format (magic {magic!r})")
    if dim == 0:
        raise DataError(f"{source}: dim must be positive")
    return int(dim), int(count)


def write_summary(summary: GaussianSummary, destination) -> None:
    """Write a GSS1 summary file."""
    summary.validate()
    with open(Path(destination), "wb") as fh:
        fh.write(_EMB_HEADER.pack(GSS_MAGIC, summary.dim, summary.count))
        np.ascontiguousarray(summary.mean, dtype="<f8").tofile(fh)
        np.ascontiguousarray(summary.cov, dtype="<f8").tofile(fh)


def read_summary(source) -> GaussianSummary:
    """Read and validate a GSS1 summary file."""
    source = Path(source)
    if not source.is_file():
        raise DataError(f"summary file not found: {source}")
    with open(source, "rb") as fh:
        head = fh.read(_EMB_HEADER.size)
        if len(head) < _EMB_HEADER.size:
            raise DataError(f"{source}: file too short for a GSS1 header")
        magic, dim, count = _EMB_HEADER.unpack(head)
        if magic != GSS_MAGIC:
            raise DataError(f"{source}: unrecognized format (magic {magic!r})")
        mean = np.fromfile(fh, dtype="<f8", count=dim)
        cov = np.fromfile(fh, dtype="<f8", count=dim * dim)
        if mean.size < dim or cov.size < dim * dim:
            raise DataError(f"{source}: truncated summary payload")
        if fh.read(1):
            raise DataError(f"{source}: trailing bytes after payload")
    summary = GaussianSummary(
        dim=int(dim), count=int(count), mean=mean, cov=cov.reshape(dim, dim)
    )
    summary.validate()
    return summary


def sniff_format(source) -> str:
    """Return 'emb' or 'gss' from a file's magic bytes."""
    source = Path(source)
    if not source.is_file():
        raise DataError(f"file not found: {source}")
    with open(source, "rb") as fh:
        magic = fh.read(4)
    if magic == EMB_MAGIC:
        return "emb"
    if magic == GSS_MAGIC:
        return "gss"
    raise DataError(f"{source}: unrecognized format (magic {magic!r})")


def read_manifest(source) -> PairManifest:
    """Read a pair-manifest JSON file and header-validate its embedding refs.

    Relative ``base_ref``/``variant_ref`` paths are resolved against the
    manifest's own directory.
    """
    source = Path(source)
    if not source.is_file():
        raise DataError(f"manifest not found: {source}")
    try:
        doc = json.loads(source.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{source}: invalid JSON ({exc})") from exc
    for key in ("attribute", "base_ref", "variant_ref", "pair_count"):
        if key not in doc:
            raise DataError(f"{source}: manifest missing field {key!r}")
    base = _resolve_ref(source, doc["base_ref"])
    variant = _resolve_ref(source, doc["variant_ref"])
    pair_count = int(doc["pair_count"])
    b_dim, b_count = read_embedding_header(base)
    v_dim, v_count = read_embedding_header(variant)
    if b_dim != v_dim:
        raise DataError(
            f"{source}: dimension mismatch (base dim {b_dim}, variant dim {v_dim})"
        )
    if b_count != v_count or b_count != pair_count:
        raise DataError(
            f"{source}: pair count mismatch (manifest {pair_count}, "
            f"base {b_count}, variant {v_count})"
        )
    return PairManifest(
        attribute=str(doc["attribute"]),
        base_ref=base,
        variant_ref=variant,
        pair_count=pair_count,
        dim=b_dim,
    )


def write_manifest(manifest: PairManifest, destination) -> None:
    doc = {
        "attribute": manifest.attribute,
        "base_ref": str(manifest.base_ref),
        "variant_ref": str(manifest.variant_ref),
        "pair_count": manifest.pair_count,
    }
    Path(destination).write_text(json.dumps(doc, indent=2) + "\n")


def _resolve_ref(manifest_path: Path, ref: str) -> Path:
    p = Path(ref)
    return p if p.is_absolute() else manifest_path.parent / p
