import json

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from percept import (
    GaussianSummary,
    PairManifest,
    write_manifest,
    write_summary,
)
from percept.service import create_app
from percept.sweep import read_curve_csv


@pytest.fixture
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_fd_endpoint(client, emb_file, rng):
    data = rng.normal(size=(300, 5)).astype(np.float32)
    a = emb_file(data)
    b = emb_file(data + np.float32(1.0))
    resp = client.post("/fd", json={"a": a, "b": b})
    assert resp.status_code == 200
    body = resp.json()
    assert body["total"] == pytest.approx(body["mean_term"] + body["trace_term"])
    assert body["mean_term"] == pytest.approx(5.0, rel=1e-6)


def test_fd_accepts_summary_files(client, emb_file, rng, tmp_path):
    from percept import summarize_embeddings
    from percept.embedio import read_embeddings

    data = rng.normal(size=(100, 4)).astype(np.float32)
    a = emb_file(data)
    summary = summarize_embeddings(read_embeddings(a))
    gss = tmp_path / "a.gss"
    write_summary(summary, gss)
    resp = client.post("/fd", json={"a": a, "b": str(gss)})
    assert resp.status_code == 200
    assert resp.json()["total"] < 1e-7


def test_fd_missing_file_maps_to_422(client, tmp_path):
    resp = client.post(
        "/fd", json={"a": str(tmp_path / "no.emb"), "b": str(tmp_path / "no.emb")}
    )
    assert resp.status_code == 422
    body = resp.json()
    assert body["exit_code"] == 2
    assert "not found" in body["detail"]


def test_fd_non_psd_summary_maps_to_500(client, emb_file, rng, tmp_path):
    # An indefinite covariance passes file validation (symmetric, finite)
    # but must fail inside the distance computation.
    bad = GaussianSummary(
        dim=2,
        count=10,
        mean=np.zeros(2),
        cov=np.diag([1.0, -1.0]),
    )
    gss = tmp_path / "bad.gss"
    write_summary(bad, gss)
    good = emb_file(rng.normal(size=(50, 2)).astype(np.float32))
    resp = client.post("/fd", json={"a": str(gss), "b": good})
    assert resp.status_code == 500
    body = resp.json()
    assert body["exit_code"] == 3
    assert "not PSD" in body["detail"]


def test_request_validation_is_422(client):
    resp = client.post("/fd", json={"a": "only-one-side.emb"})
    assert resp.status_code == 422
    resp = client.post("/pr", json={"real": "x", "gen": "y", "k": 0})
    assert resp.status_code == 422


def test_usage_error_maps_to_400(client, emb_file, rng, monkeypatch):
    monkeypatch.setenv("PERCEPT_THREADS", "lots")
    data = rng.normal(size=(30, 3)).astype(np.float32)
    resp = client.post("/pr", json={"real": emb_file(data), "gen": emb_file(data)})
    assert resp.status_code == 400
    assert resp.json()["exit_code"] == 1


def test_stats_endpoint(client, emb_file, rng, tmp_path):
    data = rng.normal(size=(120, 7)).astype(np.float32)
    out = tmp_path / "stats.gss"
    resp = client.post("/stats", json={"input": emb_file(data), "out": str(out)})
    assert resp.status_code == 200
    assert resp.json() == {"dim": 7, "count": 120, "out": str(out)}
    from percept import read_summary

    summary = read_summary(out)
    assert summary.count == 120


def test_pr_endpoint(client, emb_file, rng):
    data = rng.normal(size=(60, 4)).astype(np.float32)
    resp = client.post(
        "/pr", json={"real": emb_file(data), "gen": emb_file(data.copy()), "k": 3}
    )
    assert resp.status_code == 200
    assert resp.json() == {"precision": 1.0, "recall": 1.0, "k": 3}


def _write_manifest(tmp_path, rng, n=60, dim=3):
    base = rng.normal(size=(n, dim)).astype(np.float32)
    variant = base + np.float32(2.0)
    from .conftest import make_set
    from percept import write_embeddings

    write_embeddings(make_set(base, "base"), tmp_path / "base.emb")
    write_embeddings(make_set(variant, "variant"), tmp_path / "variant.emb")
    manifest = PairManifest(
        attribute="gender",
        base_ref=tmp_path / "base.emb",
        variant_ref=tmp_path / "variant.emb",
        pair_count=n,
        dim=dim,
    )
    path = tmp_path / "pairs.manifest.json"
    write_manifest(manifest, path)
    return path


def test_sweep_endpoint_writes_csv(client, rng, tmp_path):
    manifest_path = _write_manifest(tmp_path, rng)
    out = tmp_path / "curve.csv"
    resp = client.post(
        "/sweep",
        json={
            "manifest": str(manifest_path),
            "size": 30,
            "draws": 3,
            "seed": 5,
            "grid": [0.0, 0.5, 1.0],
            "out": str(out),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["attribute"] == "gender"
    assert [p["d"] for p in body["points"]] == [0.0, 0.5, 1.0]
    curve = read_curve_csv(out)
    assert [p.d for p in curve.points] == [0.0, 0.5, 1.0]
    assert curve.points[0].fd_mean == body["points"][0]["fd_mean"]


def test_render_endpoint(client, rng, tmp_path):
    manifest_path = _write_manifest(tmp_path, rng)
    csv_path = tmp_path / "curve.csv"
    client.post(
        "/sweep",
        json={
            "manifest": str(manifest_path),
            "size": 30,
            "draws": 2,
            "grid": [0.0, 1.0],
            "out": str(csv_path),
        },
    )
    out = tmp_path / "curve.svg"
    resp = client.post("/render", json={"input": str(csv_path), "out": str(out)})
    assert resp.status_code == 200
    assert resp.json()["out"] == str(out)
    assert resp.json()["bytes"] == out.stat().st_size
    assert out.read_text().startswith("<svg")


def test_region_report_endpoint(client, rng, tmp_path):
    from .conftest import make_set
    from percept import write_embeddings

    orig = rng.normal(size=(100, 4)).astype(np.float32)
    write_embeddings(make_set(orig), tmp_path / "all_orig.emb")
    write_embeddings(make_set(orig + np.float32(2.0)), tmp_path / "all_blur.emb")
    write_embeddings(make_set(orig), tmp_path / "hair_orig.emb")
    write_embeddings(make_set(orig + np.float32(1.0)), tmp_path / "hair_blur.emb")
    pairs = {
        "regions": [
            {"name": "All", "original_ref": "all_orig.emb", "blurred_ref": "all_blur.emb"},
            {"name": "hair", "original_ref": "hair_orig.emb", "blurred_ref": "hair_blur.emb"},
        ]
    }
    pairs_path = tmp_path / "pairs.json"
    pairs_path.write_text(json.dumps(pairs))
    out = tmp_path / "report.csv"
    resp = client.post(
        "/region-report", json={"pairs": str(pairs_path), "out": str(out)}
    )
    assert resp.status_code == 200
    body = resp.json()
    by_name = {e["region"]: e for e in body["entries"]}
    assert by_name["All"]["normalized_fd"] == 1.0
    assert by_name["hair"]["normalized_fd"] == pytest.approx(0.25, rel=0.02)
    assert out.is_file()


def test_leaderboard_endpoint(client, rng, tmp_path):
    from .conftest import make_set
    from percept import write_embeddings

    real = rng.normal(size=(80, 4)).astype(np.float32)
    write_embeddings(make_set(real), tmp_path / "real.emb")
    write_embeddings(make_set(real.copy()), tmp_path / "gen.emb")
    entries = {
        "entries": [
            {
                "generator": "exact",
                "feature_space": "feat",
                "real_ref": "real.emb",
                "gen_ref": "gen.emb",
            }
        ]
    }
    entries_path = tmp_path / "entries.json"
    entries_path.write_text(json.dumps(entries))
    out = tmp_path / "board.json"
    resp = client.post(
        "/leaderboard", json={"entries": str(entries_path), "out": str(out)}
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["cells"][0]["precision"] == 1.0
    ranks = {(r["feature_space"], r["metric"]): r["top"] for r in body["ranks"]}
    assert ranks[("feat", "fd")] == ["exact"]
    assert json.loads(out.read_text())["k"] == 3


def test_blur_endpoint(client, rng, tmp_path):
    images = tmp_path / "images"
    masks = tmp_path / "masks"
    outdir = tmp_path / "blurred"
    images.mkdir()
    masks.mkdir()
    for i in range(2):
        img = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
        Image.fromarray(img).save(images / f"im{i}.png")
        mask = np.zeros((32, 32), dtype=np.uint8)
        if i == 0:
            mask[4:20, 4:20] = 17  # hair present only in the first image
        Image.fromarray(mask, mode="L").save(masks / f"im{i}.png")
    regions = {
        "regions": [
            {"name": "All"},
            {"name": "hair", "labels": [17], "min_pixels": 16},
        ]
    }
    regions_path = tmp_path / "regions.json"
    regions_path.write_text(json.dumps(regions))
    # Default 111/100 at reference 512 scales to 7/6.25 for 32 px inputs.
    resp = client.post(
        "/blur",
        json={
            "images": str(images),
            "masks": str(masks),
            "regions": str(regions_path),
            "out": str(outdir),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["images"] == 2
    assert body["written"] == {"All": 2, "hair": 1}
    assert body["skipped"] == {"All": 0, "hair": 1}
    assert (outdir / "All" / "im0.png").is_file()
    assert (outdir / "hair" / "im0.png").is_file()
    assert not (outdir / "hair" / "im1.png").exists()


def test_blur_endpoint_missing_dir(client, tmp_path):
    resp = client.post(
        "/blur",
        json={
            "images": str(tmp_path / "none"),
            "masks": str(tmp_path / "none"),
            "regions": str(tmp_path / "regions.json"),
            "out": str(tmp_path / "out"),
        },
    )
    assert resp.status_code == 422
    assert resp.json()["exit_code"] == 2
