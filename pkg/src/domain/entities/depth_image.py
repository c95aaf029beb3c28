"""
Domain entity for a synthetic depth frame.
depths[v, u] is the range along the pixel-centre ray in metres, np.inf where
nothing was hit within the camera's far distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.camera import CameraConfig

NO_HIT = np.inf


@dataclass(frozen=True, eq=False)
class DepthImage:
    camera: CameraConfig
    depths: NDArray[np.float64]

    def __post_init__(self) -> None:
        depths = np.asarray(self.depths, dtype=np.float64)
        expected = (self.camera.image_height, self.camera.image_width)
        if depths.shape != expected:
            raise ValueError(f"depth array shape {depths.shape!r} != resolution {expected!r}")
        if np.any(~(depths > 0)):
            raise ValueError("depths must be positive or the no-hit sentinel")
        depths.setflags(write=False)
        object.__setattr__(self, "depths", depths)

    @property
    def width(self) -> int:
        return self.camera.image_width

    @property
    def height(self) -> int:
        return self.camera.image_height

    @property
    def hfov(self) -> float:
        return self.camera.hfov

    @property
    def vfov(self) -> float:
        return self.camera.vfov

    @cached_property
    def axis_depths(self) -> NDArray[np.float64]:
        """Per-pixel forward (x) depth of the hit point: range times cos of the pixel ray angle."""
        cam = self.camera
        u = np.arange(cam.image_width) + 0.5
        v = np.arange(cam.image_height) + 0.5
        uu, vv = np.meshgrid(u, v)
        cos = 1.0 / np.sqrt(1.0 + ((cam.cx - uu) / cam.fx) ** 2 + ((cam.cy - vv) / cam.fy) ** 2)
        out = self.depths * cos
        out.setflags(write=False)
        return out
