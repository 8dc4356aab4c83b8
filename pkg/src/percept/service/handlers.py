"""Operation handlers shared by the CLI and the HTTP service.

Each handler takes plain JSON-friendly arguments (paths, ints, floats),
performs one analysis operation, and returns a JSON-friendly dict. The CLI
calls these in-process; the FastAPI routes call the same functions, so both
front ends behave identically.
"""

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .. import blur as blur_mod
from .. import prmetrics, report, sweep
from ..embedio import (
    read_embeddings,
    read_manifest,
    read_summary,
    sniff_format,
    write_summary,
)
from ..errors import DataError
from ..frechet import frechet_distance
from ..gstats import summarize_embeddings
from ..runtime import bounded_ordered_map, resolve_threads


def stats(input_path: str, out: str) -> dict:
    """Summarize an EMB1 file into a GSS1 file."""
    es = read_embeddings(input_path)
    summary = summarize_embeddings(es)
    write_summary(summary, out)
    return {"dim": summary.dim, "count": summary.count, "out": str(out)}


def _load_summary(path: str):
    kind = sniff_format(path)
    if kind == "gss":
        return read_summary(path)
    return summarize_embeddings(read_embeddings(path))


def fd(path_a: str, path_b: str) -> dict:
    """Fréchet distance between two embedding or summary files."""
    res = frechet_distance(_load_summary(path_a), _load_summary(path_b))
    return {"total": res.total, "mean_term": res.mean_term, "trace_term": res.trace_term}


def pr(real_path: str, gen_path: str, k: int = 3, threads: int | None = None) -> dict:
    """kNN-manifold precision and recall of gen against real."""
    real = read_embeddings(real_path)
    gen = read_embeddings(gen_path)
    res = prmetrics.precision_recall(real, gen, k, threads=threads)
    return {"precision": res.precision, "recall": res.recall, "k": res.k}


def run_sweep(
    manifest_path: str,
    size: int = 1000,
    draws: int = 10,
    seed: int = 0,
    grid: list[float] | None = None,
    out: str | None = None,
    threads: int | None = None,
) -> dict:
    """Proportion sweep over a counterfactual pair manifest."""
    manifest = read_manifest(manifest_path)
    cfg = sweep.SweepConfig(
        set_size=size,
        draws=draws,
        diff_grid=tuple(grid) if grid else sweep.DEFAULT_DIFF_GRID,
        seed=seed,
    )
    curve = sweep.run_sweep(manifest, cfg, threads=threads)
    if out:
        sweep.write_curve_csv(curve, out)
    return {
        "attribute": curve.attribute,
        "set_size": curve.set_size,
        "draws": curve.draws,
        "seed": curve.seed,
        "points": [
            {
                "d": p.d,
                "fd_mean": p.fd_mean,
                "fd_std": p.fd_std,
                "mean_term_mean": p.mean_term_mean,
                "trace_term_mean": p.trace_term_mean,
            }
            for p in curve.points
        ],
        "out": str(out) if out else None,
    }


def _load_image(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc


def _load_labelmap(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            arr = np.asarray(img)
    except OSError as exc:
        raise DataError(f"cannot read labelmap {path}: {exc}") from exc
    if arr.ndim != 2:
        raise DataError(f"labelmap {path} must be single-channel, got shape {arr.shape}")
    return arr.astype(np.int32, copy=False)


def run_blur(
    images: str,
    masks: str,
    regions: str,
    out: str,
    kernel_size: int = 111,
    sigma: float = 100.0,
    threads: int | None = None,
) -> dict:
    """Region-blur every image in a directory against its labelmap.

    Writes out/<region>/<image name> for each region present in the image.
    Absent regions are counted as skipped, never written.
    """
    images_dir, masks_dir, out_dir = Path(images), Path(masks), Path(out)
    if not images_dir.is_dir():
        raise DataError(f"image directory not found: {images_dir}")
    if not masks_dir.is_dir():
        raise DataError(f"mask directory not found: {masks_dir}")
    specs = blur_mod.load_region_specs(regions)
    params = blur_mod.BlurParams(kernel_size=kernel_size, sigma=sigma)
    names = sorted(p.name for p in images_dir.glob("*.png"))
    if not names:
        raise DataError(f"no .png images in {images_dir}")
    for spec in specs:
        (out_dir / spec.name).mkdir(parents=True, exist_ok=True)

    def process(name: str):
        mask_path = masks_dir / name
        if not mask_path.is_file():
            raise DataError(f"no labelmap for {name} in {masks_dir}")
        image = _load_image(images_dir / name)
        labelmap = _load_labelmap(mask_path)
        written, skipped = [], []
        for spec in specs:
            if not blur_mod.region_present(labelmap, spec, params):
                skipped.append(spec.name)
                continue
            result = blur_mod.blur_region(image, labelmap, spec, params)
            Image.fromarray(result).save(out_dir / spec.name / name)
            written.append(spec.name)
        return name, written, skipped

    written_per_region = {spec.name: 0 for spec in specs}
    skipped_per_region = {spec.name: 0 for spec in specs}
    for _name, written, skipped in bounded_ordered_map(
        process, names, resolve_threads(threads)
    ):
        for r in written:
            written_per_region[r] += 1
        for r in skipped:
            skipped_per_region[r] += 1
    return {
        "images": len(names),
        "out": str(out_dir),
        "written": written_per_region,
        "skipped": skipped_per_region,
    }


def region_report(pairs: str, out: str | None = None) -> dict:
    """Per-region FD report from a pairs JSON of original/blurred EMB1 refs.

    Schema: {"regions": [{"name": str, "original_ref": path, "blurred_ref":
    path}, ...]} with refs resolved relative to the JSON file.
    """
    pairs_path = Path(pairs)
    if not pairs_path.is_file():
        raise DataError(f"pairs file not found: {pairs_path}")
    try:
        doc = json.loads(pairs_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{pairs_path}: invalid JSON ({exc})") from exc
    if "regions" not in doc or not isinstance(doc["regions"], list):
        raise DataError(f'{pairs_path}: expected a top-level "regions" list')
    base = pairs_path.parent
    originals, blurred = {}, {}
    for item in doc["regions"]:
        for key in ("name", "original_ref", "blurred_ref"):
            if key not in item:
                raise DataError(f"{pairs_path}: region entry missing {key!r}")
        name = item["name"]
        originals[name] = read_embeddings(base / item["original_ref"])
        blurred[name] = read_embeddings(base / item["blurred_ref"])
    rep = blur_mod.region_fd_report(originals, blurred)
    if out:
        blur_mod.write_report_csv(rep, out)
    return {
        "all_fd": rep.all_fd,
        "entries": [
            {
                "region": e.region,
                "raw_fd": e.raw_fd,
                "normalized_fd": e.normalized_fd,
                "image_count": e.image_count,
            }
            for e in rep.entries
        ],
        "out": str(out) if out else None,
    }


def leaderboard(
    entries: str,
    k: int = 3,
    out: str | None = None,
    threads: int | None = None,
) -> dict:
    """Build a generator-by-feature-space leaderboard from an entries JSON.

    Schema: {"entries": [{"generator": str, "feature_space": str,
    "real_ref": path, "gen_ref": path}, ...]}, refs relative to the file.
    """
    entries_path = Path(entries)
    if not entries_path.is_file():
        raise DataError(f"entries file not found: {entries_path}")
    try:
        doc = json.loads(entries_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{entries_path}: invalid JSON ({exc})") from exc
    if "entries" not in doc or not isinstance(doc["entries"], list):
        raise DataError(f'{entries_path}: expected a top-level "entries" list')
    base = entries_path.parent
    parsed = []
    for item in doc["entries"]:
        for key in ("generator", "feature_space", "real_ref", "gen_ref"):
            if key not in item:
                raise DataError(f"{entries_path}: entry missing {key!r}")
        parsed.append(
            report.LeaderboardEntry(
                generator=item["generator"],
                feature_space=item["feature_space"],
                real_path=str(base / item["real_ref"]),
                gen_path=str(base / item["gen_ref"]),
            )
        )
    board = report.build_leaderboard(parsed, k, threads=threads)
    text = report.leaderboard_to_json(board)
    if out:
        out_path = Path(out)
        if out_path.suffix == ".csv":
            out_path.write_text(report.leaderboard_to_csv(board))
        else:
            out_path.write_text(text)
    result = json.loads(text)
    result["out"] = str(out) if out else None
    return result


def render(input_path: str, out: str, title: str = "") -> dict:
    """Render a sweep-curve or region-report CSV to an SVG file."""
    src = Path(input_path)
    if not src.is_file():
        raise DataError(f"input not found: {src}")
    with open(src, newline="") as fh:
        header = fh.readline().strip()
    style = report.PlotStyle(title=title)
    if header == ",".join(sweep.CSV_COLUMNS):
        svg = report.render_sweep_curve(sweep.read_curve_csv(src), style)
    elif header == ",".join(blur_mod.REPORT_COLUMNS):
        svg = report.render_region_report(blur_mod.read_report_csv(src), style)
    else:
        raise DataError(f"{src}: not a sweep-curve or region-report CSV")
    report.write_svg(svg, out)
    return {"out": str(out), "bytes": len(svg.encode())}
