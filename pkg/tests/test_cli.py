import csv
import io
import socket
import subprocess
import sys
import time

import numpy as np
import pytest
import requests

from viderex.cli import main
from viderex.evalharness import (
    make_sweep_dataset,
    make_training_route,
    save_dataset,
    synth_world,
)
from viderex.imgproc import GrayImage
from viderex.store import encode_pgm, load_manifest, save_route


def write_frames(dirpath, n, rng):
    dirpath.mkdir(parents=True, exist_ok=True)
    for k in range(n):
        img = GrayImage(rng.random((25, 90)))
        (dirpath / f"frame_{k:05d}.pgm").write_bytes(encode_pgm(img))


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------- record

def test_record_five_frames(tmp_path, capsys):
    rng = np.random.default_rng(110)
    write_frames(tmp_path / "seq", 5, rng)
    code, _, err = run_cli(capsys, [
        "record", str(tmp_path / "seq"), "--name", "five",
        "--store", str(tmp_path / "routes"),
    ])
    assert code == 0
    manifest = load_manifest(tmp_path / "routes" / "five")
    assert len(manifest.frame_files) == 5


def test_record_empty_dir_fails(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    code, _, err = run_cli(capsys, [
        "record", str(tmp_path / "empty"), "--store", str(tmp_path / "routes"),
    ])
    assert code != 0
    assert "no frames" in err


def test_record_stride_oracle(tmp_path, capsys):
    rng = np.random.default_rng(111)
    write_frames(tmp_path / "seq", 100, rng)
    code, _, _ = run_cli(capsys, [
        "record", str(tmp_path / "seq"), "--name", "strided", "--stride", "7",
        "--store", str(tmp_path / "routes"),
    ])
    assert code == 0
    manifest = load_manifest(tmp_path / "routes" / "strided")
    assert len(manifest.frame_files) == 15


# ---------------------------------------------------------------- follow

def test_follow_training_frames_all_zero(tmp_path, capsys):
    rng = np.random.default_rng(112)
    write_frames(tmp_path / "seq", 4, rng)
    run_cli(capsys, [
        "record", str(tmp_path / "seq"), "--name", "r", "--store",
        str(tmp_path / "routes"),
    ])
    code, out, _ = run_cli(capsys, [
        "follow", "r", "--frames", str(tmp_path / "routes" / "r" / "frames"),
        "--store", str(tmp_path / "routes"),
    ])
    assert code == 0
    lines = out.strip().splitlines()
    rows = list(csv.reader(io.StringIO("\n".join(lines[:-1]))))
    assert rows[0] == ["frame_seq", "angle_deg", "best_index", "diff", "tone_hz", "haptic"]
    for i, row in enumerate(rows[1:]):
        assert int(row[0]) == i
        assert float(row[3]) == 0.0
        assert int(row[2]) == i
    assert lines[-1] == "# heading_estimate_deg=0.0"


def test_follow_unknown_route(tmp_path, capsys):
    code, _, err = run_cli(capsys, [
        "follow", "ghost", "--frames", str(tmp_path),
        "--store", str(tmp_path / "routes"),
    ])
    assert code != 0
    assert "not found" in err


def test_follow_sweep_dir_matches_evalharness(tmp_path, capsys):
    world = synth_world(7)
    route = make_training_route(world, n_positions=3)
    save_route(route, tmp_path / "routes")
    ds = make_sweep_dataset(world, n_positions=1, offsets_cm=(14.0,),
                            arc_deg=45.0, step_deg=2.5)
    save_dataset(ds, tmp_path / "ds")

    code, out, _ = run_cli(capsys, [
        "follow", "synth",
        "--frames", str(tmp_path / "ds" / "pos_000" / "sweep"),
        "--store", str(tmp_path / "routes"),
    ])
    assert code == 0
    lines = out.strip().splitlines()
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:-1]))))

    # oracle: the harness evaluated on the loaded dataset gives the same curve
    from viderex.evalharness import evaluate, load_dataset
    from viderex.route import build_memory
    from viderex.store import load_route

    loaded = load_dataset(tmp_path / "ds")
    memory = build_memory(load_route(tmp_path / "routes" / "synth"))
    res = evaluate(loaded, memory)
    curve = res.positions[0].curve
    assert len(rows) == curve.diffs.size
    for row, angle, diff in zip(rows, curve.angles_deg, curve.diffs):
        assert float(row[1]) == pytest.approx(angle, abs=1e-9)
        assert float(row[3]) == pytest.approx(diff, abs=0)
    est = float(lines[-1].split("=", 1)[1])
    assert est == res.positions[0].heading_estimate_deg


# ---------------------------------------------------------------- eval

def test_eval_writes_artifacts(tmp_path, capsys):
    world = synth_world(7)
    route = make_training_route(world, n_positions=2)
    save_route(route, tmp_path / "routes")
    ds = make_sweep_dataset(world, n_positions=2, offsets_cm=(0.0, 7.0),
                            arc_deg=30.0, step_deg=5.0)
    save_dataset(ds, tmp_path / "ds")
    code, _, err = run_cli(capsys, [
        "eval", str(tmp_path / "ds"), "synth",
        "--store", str(tmp_path / "routes"), "--out", str(tmp_path / "out"),
    ])
    assert code == 0
    assert (tmp_path / "out" / "errors.csv").is_file()
    ridf_files = sorted((tmp_path / "out").glob("ridf_*.csv"))
    assert len(ridf_files) == 4
    assert "offset 0 cm" in err


def test_eval_unknown_dataset(tmp_path, capsys):
    code, _, err = run_cli(capsys, [
        "eval", str(tmp_path / "nope"), "r", "--store", str(tmp_path / "routes"),
    ])
    assert code != 0


# ---------------------------------------------------------------- serve

def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_subprocess_and_port_conflict(tmp_path):
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "viderex.cli", "serve",
         "--port", str(port), "--store", str(tmp_path / "store")],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE,
    )
    try:
        deadline = time.time() + 30
        while True:
            try:
                resp = requests.get(f"http://127.0.0.1:{port}/routes", timeout=1)
                break
            except requests.RequestException:
                if time.time() > deadline:
                    raise RuntimeError("server did not come up")
                time.sleep(0.2)
        assert resp.json() == []

        # same port again: must exit nonzero promptly
        clash = subprocess.run(
            [sys.executable, "-m", "viderex.cli", "serve",
             "--port", str(port), "--store", str(tmp_path / "store2")],
            capture_output=True, timeout=60,
        )
        assert clash.returncode != 0
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_env_var_defaults(tmp_path, monkeypatch):
    monkeypatch.setenv("VIDEREX_PORT", "1234")
    monkeypatch.setenv("VIDEREX_STORE", str(tmp_path / "envstore"))
    from viderex.cli import _parser

    args = _parser().parse_args(["serve"])
    assert args.port == 1234
    assert str(args.store) == str(tmp_path / "envstore")
