"""
Domain entity for a pinhole camera configuration.
Camera frame: +x forward (view axis), +y left, +z up. Image frame: u to the
right, v downward, pixel (i, j) centred at (i + 0.5, j + 0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from src.domain.entities.geometry import Frustum, Vec3, as_vec3


def camera_rotation(yaw: float, pitch: float) -> Rotation:
    """Camera-to-world rotation for a heading *yaw* and an upward *pitch* (radians)."""
    return Rotation.from_euler("ZY", [yaw, -pitch])


@dataclass(frozen=True, eq=False)
class CameraConfig:
    position: Vec3
    orientation: Rotation
    hfov: float
    vfov: float
    far: float
    image_width: int
    image_height: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", as_vec3(self.position))
        if not self.far > 0:
            raise ValueError(f"far must be > 0, got {self.far!r}")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError(
                f"resolution must be positive, got {self.image_width!r}x{self.image_height!r}"
            )
        if not (0.0 < self.hfov < math.pi and 0.0 < self.vfov < math.pi):
            raise ValueError(f"fov must lie in (0, pi): hfov={self.hfov!r}, vfov={self.vfov!r}")

    @property
    def fx(self) -> float:
        return (self.image_width / 2.0) / math.tan(self.hfov / 2.0)

    @property
    def fy(self) -> float:
        return (self.image_height / 2.0) / math.tan(self.vfov / 2.0)

    @property
    def cx(self) -> float:
        return self.image_width / 2.0

    @property
    def cy(self) -> float:
        return self.image_height / 2.0

    @property
    def axis(self) -> Vec3:
        return self.orientation.apply(np.array([1.0, 0.0, 0.0]))

    @cached_property
    def world_to_camera_matrix(self) -> NDArray[np.float64]:
        return self.orientation.as_matrix().T

    def frustum(self) -> Frustum:
        return Frustum(self.position, self.orientation, self.hfov, self.vfov, self.far)

    def to_camera(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """World points (N, 3) → camera-frame points (N, 3)."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return (pts - self.position) @ self.world_to_camera_matrix.T

    def to_world_dirs(self, dirs: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(dirs, dtype=np.float64).reshape(-1, 3) @ self.orientation.as_matrix().T

    def projection_matrix(self) -> NDArray[np.float64]:
        """3x4 matrix P with P @ [p, 1] ∝ [u, v, 1] for world points p in front of the camera."""
        k = np.array(
            [
                [self.cx, -self.fx, 0.0],
                [self.cy, 0.0, -self.fy],
                [1.0, 0.0, 0.0],
            ]
        )
        r = self.world_to_camera_matrix
        return k @ np.hstack([r, (-r @ self.position).reshape(3, 1)])

    def pixel_directions(self) -> NDArray[np.float64]:
        """Unit world-frame directions through every pixel centre, shape (H, W, 3)."""
        u = np.arange(self.image_width, dtype=np.float64) + 0.5
        v = np.arange(self.image_height, dtype=np.float64) + 0.5
        uu, vv = np.meshgrid(u, v)
        local = np.stack(
            [
                np.ones_like(uu),
                (self.cx - uu) / self.fx,
                (self.cy - vv) / self.fy,
            ],
            axis=-1,
        )
        local /= np.linalg.norm(local, axis=-1, keepdims=True)
        world = self.to_world_dirs(local.reshape(-1, 3))
        return world.reshape(self.image_height, self.image_width, 3)

    def with_pose(self, position: Vec3, orientation: Rotation) -> "CameraConfig":
        return CameraConfig(
            position,
            orientation,
            self.hfov,
            self.vfov,
            self.far,
            self.image_width,
            self.image_height,
        )
