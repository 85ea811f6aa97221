# Copyright Contributors to the hravatar project
# SPDX-License-Identifier: Apache-2.0
import json
import os
import pathlib
import subprocess

import pytest

BIN = os.environ.get("HRA_AVATAR_BIN")
SRC = pathlib.Path(os.environ.get("HRA_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))

pytestmark = pytest.mark.skipif(not BIN, reason="HRA_AVATAR_BIN not set")


def avatar(*args):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, timeout=600)


@pytest.fixture(scope="module")
def small(tmp_path_factory):
    path = tmp_path_factory.mktemp("asset") / "small.hra"
    r = avatar("gen", "--splats", 3000, "--vertices", 800, "--seed", 5, "--garment", "--out", path)
    assert r.returncode == 0, r.stderr
    return path


def test_validate_ok(small):
    r = avatar("validate", "--asset", small)
    assert r.returncode == 0, r.stdout + r.stderr


def test_validate_corrupt_is_io_error(small, tmp_path):
    bad = tmp_path / "bad.hra"
    bad.write_bytes(small.read_bytes()[:100])
    assert avatar("validate", "--asset", bad).returncode == 2
    assert avatar("validate", "--asset", tmp_path / "missing.hra").returncode == 2


def test_usage_error():
    assert avatar("render").returncode == 1
    assert avatar("frobnicate").returncode == 1


def test_render_timings_match_schema(small, tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    out = tmp_path / "frames"
    timings = tmp_path / "t.json"
    r = avatar("render", "--asset", small, "--poses", SRC / "configs" / "poses_arm_raise_4.json",
               "--camera", SRC / "configs" / "camera_small.json", "--config", SRC / "configs" / "render_default.json",
               "--out", out, "--timings", timings)
    assert r.returncode == 0, r.stderr
    assert sorted(p.name for p in out.iterdir()) == [f"frame_{i:04d}.ppm" for i in range(4)]
    schema = json.loads((SRC / "docs" / "timings.schema.json").read_text())
    data = json.loads(timings.read_text())
    jsonschema.validate(data, schema)
    assert data["frame_count"] == 4


def test_render_stereo(small, tmp_path):
    out = tmp_path / "stereo"
    r = avatar("render", "--asset", small, "--arm-raise", 2, "--stereo", SRC / "configs" / "stereo_small.json",
               "--out", out)
    assert r.returncode == 0, r.stderr
    names = sorted(p.name for p in out.iterdir())
    assert "frame_0000_left.ppm" in names and "frame_0001_right.ppm" in names


def test_bad_camera_is_validation_error(small, tmp_path):
    cam = json.loads((SRC / "configs" / "camera_small.json").read_text())
    cam["fx"] = -3
    path = tmp_path / "cam.json"
    path.write_text(json.dumps(cam))
    r = avatar("render", "--asset", small, "--arm-raise", 1, "--camera", path, "--out", tmp_path / "o")
    assert r.returncode == 1


def test_bench_counts_are_reproducible(small, tmp_path):
    def run(name):
        path = tmp_path / name
        r = avatar("bench", "--asset", small, "--frames", 3, "--matrix", SRC / "configs" / "ablation.json",
                   "--camera", SRC / "configs" / "camera_small.json", "--json", path)
        assert r.returncode == 0, r.stderr
        return [(row["name"], row["survivors_total"], row["decoded_total"])
                for row in json.loads(path.read_text())["rows"]]

    a, b = run("a.json"), run("b.json")
    assert a == b
    assert a[0][1] >= a[-1][1]
