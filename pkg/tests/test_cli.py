import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from percept import GaussianSummary, PairManifest, write_manifest, write_summary
from percept.cli import main
from percept.sweep import read_curve_csv

from .conftest import make_set


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_subcommand_is_usage_error(capsys):
    code, _, err = _run(capsys, [])
    assert code == 1
    assert "no subcommand" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = _run(capsys, ["fd", "--bogus", "a", "b"])
    assert code == 1
    assert "error:" in err


def test_bad_grid_is_usage_error(capsys):
    code, _, err = _run(capsys, ["sweep", "--manifest", "m.json", "--grid", "a,b"])
    assert code == 1
    assert "invalid grid" in err


def test_fd_command(capsys, emb_file, rng):
    data = rng.normal(size=(200, 4)).astype(np.float32)
    a = emb_file(data)
    b = emb_file(data + np.float32(3.0))
    code, out, _ = _run(capsys, ["fd", a, b])
    assert code == 0
    body = json.loads(out)
    assert body["mean_term"] == pytest.approx(36.0, rel=1e-5)
    assert set(body) == {"total", "mean_term", "trace_term"}


def test_fd_missing_file_exits_2(capsys, tmp_path):
    code, _, err = _run(
        capsys, ["fd", str(tmp_path / "a.emb"), str(tmp_path / "b.emb")]
    )
    assert code == 2
    assert "not found" in err


def test_fd_non_psd_exits_3(capsys, emb_file, rng, tmp_path):
    bad = GaussianSummary(dim=2, count=5, mean=np.zeros(2), cov=np.diag([1.0, -1.0]))
    gss = tmp_path / "bad.gss"
    write_summary(bad, gss)
    good = emb_file(rng.normal(size=(40, 2)).astype(np.float32))
    code, _, err = _run(capsys, ["fd", str(gss), good])
    assert code == 3
    assert "not PSD" in err


def test_stats_and_pr_commands(capsys, emb_file, rng, tmp_path):
    data = rng.normal(size=(80, 5)).astype(np.float32)
    path = emb_file(data)
    out = tmp_path / "s.gss"
    code, text, _ = _run(capsys, ["stats", "--input", path, "--out", str(out)])
    assert code == 0
    assert json.loads(text) == {"dim": 5, "count": 80, "out": str(out)}

    code, text, _ = _run(
        capsys, ["pr", "--real", path, "--gen", path, "--k", "1", "--threads", "1"]
    )
    assert code == 0
    assert json.loads(text) == {"precision": 1.0, "recall": 1.0, "k": 1}


def _manifest(tmp_path, rng, n=40, dim=3):
    from percept import write_embeddings

    base = rng.normal(size=(n, dim)).astype(np.float32)
    write_embeddings(make_set(base, "base"), tmp_path / "base.emb")
    write_embeddings(make_set(base + np.float32(2.0), "variant"),
                     tmp_path / "variant.emb")
    path = tmp_path / "pairs.manifest.json"
    write_manifest(
        PairManifest(
            attribute="smile",
            base_ref=tmp_path / "base.emb",
            variant_ref=tmp_path / "variant.emb",
            pair_count=n,
            dim=dim,
        ),
        path,
    )
    return str(path)


def test_sweep_command_writes_csv(capsys, rng, tmp_path):
    manifest = _manifest(tmp_path, rng)
    out = tmp_path / "curve.csv"
    code, text, _ = _run(
        capsys,
        ["sweep", "--manifest", manifest, "--size", "20", "--draws", "2",
         "--grid", "0,0.5,1", "--seed", "9", "--out", str(out)],
    )
    assert code == 0
    body = json.loads(text)
    assert body["seed"] == 9
    curve = read_curve_csv(out)
    assert [p.d for p in curve.points] == [0.0, 0.5, 1.0]


def test_global_flags_both_positions(capsys, rng, tmp_path):
    manifest = _manifest(tmp_path, rng)
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    args_tail = ["--manifest", manifest, "--size", "20", "--draws", "2",
                 "--grid", "0,1"]
    code, _, _ = _run(
        capsys, ["--seed", "4", "--threads", "1", "sweep", *args_tail, "--out", str(out_a)]
    )
    assert code == 0
    code, _, _ = _run(
        capsys, ["sweep", *args_tail, "--seed", "4", "--threads", "1", "--out", str(out_b)]
    )
    assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_render_command_dispatch(capsys, rng, tmp_path):
    manifest = _manifest(tmp_path, rng)
    csv_path = tmp_path / "curve.csv"
    _run(capsys, ["sweep", "--manifest", manifest, "--size", "20", "--draws", "2",
                  "--grid", "0,1", "--out", str(csv_path)])
    svg_path = tmp_path / "curve.svg"
    code, text, _ = _run(
        capsys, ["render", "--input", str(csv_path), "--out", str(svg_path)]
    )
    assert code == 0
    assert json.loads(text)["bytes"] == svg_path.stat().st_size
    assert "attribute proportion difference (smile)" in svg_path.read_text()


def test_region_report_command(capsys, rng, tmp_path):
    from percept import write_embeddings

    orig = rng.normal(size=(60, 3)).astype(np.float32)
    write_embeddings(make_set(orig), tmp_path / "o.emb")
    write_embeddings(make_set(orig + np.float32(1.0)), tmp_path / "b.emb")
    pairs = tmp_path / "pairs.json"
    pairs.write_text(json.dumps({
        "regions": [
            {"name": "All", "original_ref": "o.emb", "blurred_ref": "b.emb"},
        ]
    }))
    out = tmp_path / "report.csv"
    code, text, _ = _run(
        capsys, ["region-report", "--pairs", str(pairs), "--out", str(out)]
    )
    assert code == 0
    assert json.loads(text)["entries"][0]["normalized_fd"] == 1.0
    assert out.read_text().startswith("region,raw_fd,normalized_fd,image_count")


def test_leaderboard_command_csv_out(capsys, rng, tmp_path):
    from percept import write_embeddings

    real = rng.normal(size=(50, 3)).astype(np.float32)
    write_embeddings(make_set(real), tmp_path / "real.emb")
    write_embeddings(make_set(real.copy()), tmp_path / "gen.emb")
    entries = tmp_path / "entries.json"
    entries.write_text(json.dumps({
        "entries": [{"generator": "g", "feature_space": "f",
                     "real_ref": "real.emb", "gen_ref": "gen.emb"}]
    }))
    out = tmp_path / "board.csv"
    code, text, _ = _run(
        capsys,
        ["leaderboard", "--entries", str(entries), "--out", str(out), "--threads", "1"],
    )
    assert code == 0
    assert out.read_text().splitlines()[0].startswith("generator,feature_space")
    body = json.loads(text)
    assert body["cells"][0]["recall"] == 1.0


class _StubHandler(BaseHTTPRequestHandler):
    calls: list = []
    status = 200
    body: dict = {"ok": True}

    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        payload = json.loads(self.rfile.read(length) or b"{}")
        type(self).calls.append((self.path, payload))
        data = json.dumps(type(self).body).encode()
        self.send_response(type(self).status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.calls = []
    _StubHandler.status = 200
    _StubHandler.body = {"ok": True}
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    thread.join(timeout=5)


def test_server_mode_routes_payload(capsys, stub_server):
    _StubHandler.body = {"precision": 0.5, "recall": 0.25, "k": 3}
    code, out, _ = _run(
        capsys,
        ["--server", stub_server, "pr", "--real", "r.emb", "--gen", "g.emb", "--k", "3"],
    )
    assert code == 0
    assert json.loads(out) == {"precision": 0.5, "recall": 0.25, "k": 3}
    assert _StubHandler.calls == [
        ("/pr", {"real": "r.emb", "gen": "g.emb", "k": 3, "threads": None})
    ]


def test_server_mode_maps_http_errors(capsys, stub_server):
    _StubHandler.status = 422
    _StubHandler.body = {"detail": "no such file", "exit_code": 2}
    code, _, err = _run(capsys, ["--server", stub_server, "fd", "a.emb", "b.emb"])
    assert code == 2
    assert "no such file" in err

    _StubHandler.status = 500
    _StubHandler.body = {"detail": "covariance is not PSD", "exit_code": 3}
    code, _, err = _run(capsys, ["--server", stub_server, "fd", "a.emb", "b.emb"])
    assert code == 3
    assert "not PSD" in err

    _StubHandler.status = 400
    _StubHandler.body = {"detail": "bad threads", "exit_code": 1}
    code, _, err = _run(capsys, ["--server", stub_server, "fd", "a.emb", "b.emb"])
    assert code == 1


def test_server_unreachable_exits_2(capsys):
    code, _, err = _run(
        capsys, ["--server", "http://127.0.0.1:9", "fd", "a.emb", "b.emb"]
    )
    assert code == 2
    assert "cannot reach" in err
