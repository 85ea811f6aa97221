# Copyright Contributors to the hravatar project
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

hravatar = pytest.importorskip("hravatar")


@pytest.fixture(scope="module")
def asset():
    return hravatar.generate(splats=4000, vertices=1000, seed=11).compress()


def test_asset_summary(asset):
    assert asset.splat_count == 4000
    assert asset.joint_count == 17
    assert asset.compressed
    assert asset.compression_ratio <= 0.30
    assert asset.validate() == []


def test_bytes_round_trip(asset):
    data = asset.to_bytes()
    assert hravatar.from_bytes(data).to_bytes() == data
    with pytest.raises(hravatar.FormatError):
        hravatar.from_bytes(data[:-1])


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        hravatar.load(tmp_path / "missing.hra")


def test_render_is_deterministic(asset):
    poses = hravatar.arm_raise(asset, 3)
    cam = hravatar.avatar_camera(96, 72)
    a, timings = hravatar.Renderer(asset).render(poses, 2, cam)
    b, _ = hravatar.Renderer(asset, {"threads": 2}).render(poses, 2, cam)
    assert a.shape == (72, 96, 4) and a.dtype == np.uint8
    assert (a[..., 3] > 0).any()
    assert np.array_equal(a, b)
    assert timings["splat_count"] == 4000
    assert timings["passes_ms"]["total"] >= 0


def test_stereo_zero_baseline(asset):
    poses = hravatar.arm_raise(asset, 2)
    rig = hravatar.stereo_from_center(hravatar.avatar_camera(64, 64), 0.0)
    left, right, timings = hravatar.Renderer(asset).render_stereo(poses, 0, rig)
    assert timings["stereo"]
    assert np.array_equal(left, right)


def test_bad_inputs(asset):
    poses = hravatar.arm_raise(asset, 2)
    cam = hravatar.avatar_camera(32, 32)
    r = hravatar.Renderer(asset)
    with pytest.raises(IndexError):
        r.render(poses, 5, cam)
    with pytest.raises(ValueError):
        hravatar.Renderer(asset, {"sort": {"mode": "bitonic"}})
    with pytest.raises(ValueError):
        asset.compress()
