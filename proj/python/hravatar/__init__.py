# Copyright Contributors to the hravatar project
# SPDX-License-Identifier: Apache-2.0
"""Python access to the hravatar runtime.

Cameras, pose sequences, render configs and timings are plain dicts in the
same JSON layout the ``avatar`` tool reads and writes.
"""

import json

from . import _core
from ._core import (
    Asset,
    DimensionError,
    FormatError,
    IoError,
    SolverError,
    ValidationError,
    from_bytes,
    generate,
    load,
)

__all__ = [
    "Asset",
    "DimensionError",
    "FormatError",
    "IoError",
    "Renderer",
    "SolverError",
    "ValidationError",
    "arm_raise",
    "avatar_camera",
    "default_config",
    "from_bytes",
    "generate",
    "load",
    "stereo_from_center",
]


def avatar_camera(width, height, framing="full_body"):
    return json.loads(_core.avatar_camera(width, height, framing))


def stereo_from_center(camera, baseline=0.064):
    return json.loads(_core.stereo_from_center(json.dumps(camera), baseline))


def arm_raise(asset, frames=60):
    return json.loads(asset.arm_raise(frames))


def default_config():
    return json.loads(_core.default_config())


class Renderer:
    """Keeps per-asset state across frames; one instance per avatar."""

    def __init__(self, asset, config=None):
        self._impl = _core.Renderer(asset, json.dumps(config) if config else "")

    def render(self, poses, frame, camera):
        """Returns (H x W x 4 uint8 image, timings dict)."""
        image, timings = self._impl.render(json.dumps(poses), frame, json.dumps(camera))
        return image, json.loads(timings)

    def render_stereo(self, poses, frame, stereo):
        """Returns (left, right, timings dict)."""
        left, right, timings = self._impl.render_stereo(json.dumps(poses), frame, json.dumps(stereo))
        return left, right, json.loads(timings)
