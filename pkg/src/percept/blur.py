"""Region-localized Gaussian blur of images plus the per-region FD report.

An image is blurred as a whole with a separable normalized Gaussian kernel
(reflect padding), then composited: pixels whose segmentation label falls in
the region keep the blurred value, all others keep the original bit-exactly.
The per-region report normalizes each region's FD by the FD of the fully
blurred ("All") corpus.
"""

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from . import frechet
from .embedio import EmbeddingSet
from .errors import DataError

# Reserved region name meaning "blur every pixel"; also the normalization
# denominator of the report.
ALL_REGION = "All"

REPORT_COLUMNS = ("region", "raw_fd", "normalized_fd", "image_count")


@dataclass(frozen=True)
class RegionSpec:
    """Named semantic region: a set of segmentation label indices."""

    name: str
    labels: frozenset
    min_pixels: int = 64

    def __post_init__(self):
        if self.name != ALL_REGION and not self.labels:
            raise DataError(f"region {self.name!r} has no labels")
        if self.min_pixels < 1:
            raise DataError(f"min_pixels must be >= 1, got {self.min_pixels}")

    @classmethod
    def make(cls, name: str, labels, min_pixels: int = 64) -> "RegionSpec":
        return cls(name=name, labels=frozenset(int(v) for v in labels),
                   min_pixels=int(min_pixels))


@dataclass(frozen=True)
class BlurParams:
    kernel_size: int = 111
    sigma: float = 100.0
    reference_resolution: int = 512

    def __post_init__(self):
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise DataError(
                f"kernel_size must be odd and >= 3, got {self.kernel_size}"
            )
        if self.sigma <= 0:
            raise DataError(f"sigma must be positive, got {self.sigma}")
        if self.reference_resolution < 1:
            raise DataError("reference_resolution must be >= 1")

    def scaled(self, width: int) -> tuple[int, float]:
        """Kernel size and sigma for an image of the given width.

        Both scale linearly with width relative to the reference resolution;
        the kernel size is forced odd.
        """
        scale = width / self.reference_resolution
        size = int(round(self.kernel_size * scale))
        if size < 1:
            raise DataError(
                f"empty kernel after scaling (width {width} vs "
                f"reference {self.reference_resolution})"
            )
        if size % 2 == 0:
            size += 1
        size = max(size, 3)
        return size, self.sigma * scale


@dataclass
class RegionEntry:
    region: str
    raw_fd: float
    normalized_fd: float
    image_count: int


@dataclass
class RegionReport:
    entries: list[RegionEntry]
    all_fd: float


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Symmetric 1-D Gaussian kernel of odd length ``size``, normalized to sum 1."""
    if size < 1 or size % 2 == 0:
        raise DataError(f"kernel size must be odd and positive, got {size}")
    if sigma <= 0:
        raise DataError(f"sigma must be positive, got {sigma}")
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_blur(image: np.ndarray, size: int, sigma: float) -> np.ndarray:
    """Full-image separable Gaussian blur with reflect padding, uint8 in/out."""
    kernel = gaussian_kernel(size, sigma)
    work = image.astype(np.float64)
    if work.ndim == 2:
        work = work[:, :, None]
    for axis in (0, 1):
        work = correlate1d(work, kernel, axis=axis, mode="reflect")
    out = np.clip(np.rint(work), 0, 255).astype(np.uint8)
    return out[:, :, 0] if image.ndim == 2 else out


def _label_mask(labelmap: np.ndarray, spec: RegionSpec) -> np.ndarray:
    if spec.name == ALL_REGION:
        return np.ones(labelmap.shape, dtype=bool)
    return np.isin(labelmap, sorted(spec.labels))


def blur_region(
    image: np.ndarray,
    labelmap: np.ndarray,
    spec: RegionSpec,
    params: BlurParams = BlurParams(),
) -> np.ndarray:
    """Composite of the original and its full blur, blurred inside the region.

    Pixels outside the region are copied bit-exactly from the input.
    """
    image = np.asarray(image)
    labelmap = np.asarray(labelmap)
    if labelmap.ndim != 2:
        raise DataError(f"labelmap must be 2-D, got shape {labelmap.shape}")
    if image.shape[:2] != labelmap.shape:
        raise DataError(
            f"image {image.shape[:2]} and labelmap {labelmap.shape} sizes differ"
        )
    if not np.issubdtype(labelmap.dtype, np.integer):
        raise DataError(f"labelmap must be integer-typed, got {labelmap.dtype}")
    size, sigma = params.scaled(image.shape[1])
    blurred = gaussian_blur(image, size, sigma)
    mask = _label_mask(labelmap, spec)
    out = image.copy()
    out[mask] = blurred[mask]
    return out


def region_present(labelmap: np.ndarray, spec: RegionSpec,
                   params: BlurParams = BlurParams()) -> bool:
    """True iff the region covers at least ``min_pixels`` (area-scaled) pixels."""
    labelmap = np.asarray(labelmap)
    if spec.name == ALL_REGION:
        return True
    area_scale = labelmap.size / float(params.reference_resolution ** 2)
    threshold = max(1, int(round(spec.min_pixels * area_scale)))
    return int(_label_mask(labelmap, spec).sum()) >= threshold


def region_fd_report(
    original_embs: dict[str, EmbeddingSet],
    blurred_embs: dict[str, EmbeddingSet],
) -> RegionReport:
    """Raw and All-normalized FD per region between original and blurred sets."""
    if ALL_REGION not in original_embs or ALL_REGION not in blurred_embs:
        raise DataError(f'region maps must contain the "{ALL_REGION}" key')
    regions = list(original_embs)
    raw: dict[str, float] = {}
    counts: dict[str, int] = {}
    for name in regions:
        if name not in blurred_embs:
            raise DataError(f"region {name!r} missing from blurred map")
        orig, blur = original_embs[name], blurred_embs[name]
        if orig.count != blur.count:
            raise DataError(
                f"region {name!r}: original has {orig.count} rows, "
                f"blurred has {blur.count}"
            )
        raw[name] = frechet.fd_between_sets(orig, blur).total
        counts[name] = orig.count
    all_fd = raw[ALL_REGION]
    if all_fd <= 0.0:
        raise DataError(
            'FD of the "All" region is zero; cannot normalize '
            "(are the blurred embeddings identical to the originals?)"
        )
    entries = [
        RegionEntry(
            region=name,
            raw_fd=raw[name],
            normalized_fd=raw[name] / all_fd,
            image_count=counts[name],
        )
        for name in regions
    ]
    return RegionReport(entries=entries, all_fd=all_fd)


def load_region_specs(source) -> list[RegionSpec]:
    """Parse a region-config JSON: {"regions": [{"name", "labels", "min_pixels"}]}."""
    source = Path(source)
    if not source.is_file():
        raise DataError(f"region config not found: {source}")
    try:
        doc = json.loads(source.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{source}: invalid JSON ({exc})") from exc
    if "regions" not in doc or not isinstance(doc["regions"], list):
        raise DataError(f'{source}: expected a top-level "regions" list')
    specs = []
    for item in doc["regions"]:
        if "name" not in item:
            raise DataError(f"{source}: region entry without a name")
        if item["name"] == ALL_REGION:
            specs.append(RegionSpec(name=ALL_REGION, labels=frozenset(),
                                    min_pixels=int(item.get("min_pixels", 64))))
            continue
        if "labels" not in item:
            raise DataError(f"{source}: region {item['name']!r} has no labels")
        specs.append(RegionSpec.make(item["name"], item["labels"],
                                     item.get("min_pixels", 64)))
    return specs


def report_to_csv(report: RegionReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for e in report.entries:
        writer.writerow([e.region, repr(e.raw_fd), repr(e.normalized_fd), e.image_count])
    return buf.getvalue()


def write_report_csv(report: RegionReport, destination) -> None:
    Path(destination).write_text(report_to_csv(report))


def read_report_csv(source) -> RegionReport:
    source = Path(source)
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != REPORT_COLUMNS:
            raise DataError(f"{source}: not a region-report CSV (header {header})")
        rows = list(reader)
    if not rows:
        raise DataError(f"{source}: empty region report")
    entries = [
        RegionEntry(region=r[0], raw_fd=float(r[1]), normalized_fd=float(r[2]),
                    image_count=int(r[3]))
        for r in rows
    ]
    all_fd = next((e.raw_fd for e in entries if e.region == ALL_REGION), 0.0)
    return RegionReport(entries=entries, all_fd=all_fd)
