"""
Synthetic depth rendering and pinhole projection.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from src.application.geometry.bvh import Bvh
from src.domain.entities.camera import CameraConfig
from src.domain.entities.depth_image import DepthImage
from src.domain.entities.geometry import Vec3, as_vec3


def render_depth(cam: CameraConfig, bvh: Bvh, max_workers: int = 1) -> DepthImage:
    """Nearest-hit range along every pixel-centre ray, up to cam.far; np.inf where nothing is hit.

    Rows are rendered in independent bands when max_workers > 1; the result
    does not depend on the band split.
    """
    dirs = cam.pixel_directions()
    depths = np.empty((cam.image_height, cam.image_width))

    def band(rows: range) -> None:
        d = dirs[rows.start : rows.stop].reshape(-1, 3)
        t, _ = bvh.nearest_hit(cam.position, d, cam.far)
        depths[rows.start : rows.stop] = t.reshape(-1, cam.image_width)

    if max_workers > 1 and cam.image_height > 1:
        step = -(-cam.image_height // max_workers)
        bands = [range(r, min(r + step, cam.image_height)) for r in range(0, cam.image_height, step)]
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(band, bands))
    else:
        band(range(cam.image_height))
    return DepthImage(cam, depths)


def project_points(cam: CameraConfig, points: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    """Pixel coordinates (N, 2) and camera-frame forward depth X (N,); no bounds check."""
    local = cam.to_camera(points)
    x = local[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cam.cx - cam.fx * local[:, 1] / x
        v = cam.cy - cam.fy * local[:, 2] / x
    return np.stack([u, v], axis=1), x


def project_point(cam: CameraConfig, p: Vec3) -> Optional[tuple[float, float, float]]:
    """(u, v, range) of *p*, or None when it is behind the camera or outside the image.

    range is the Euclidean distance from the camera centre, the same quantity a
    depth pixel stores.
    """
    p = as_vec3(p)
    uv, x = project_points(cam, p)
    if not x[0] > 0:
        return None
    u, v = float(uv[0, 0]), float(uv[0, 1])
    if not (0.0 <= u < cam.image_width and 0.0 <= v < cam.image_height):
        return None
    return u, v, float(np.linalg.norm(p - cam.position))


def pixel_ray(cam: CameraConfig, u: float, v: float) -> Vec3:
    """Unit world direction through image point (u, v)."""
    local = np.array([1.0, (cam.cx - u) / cam.fx, (cam.cy - v) / cam.fy])
    return cam.to_world_dirs(local / np.linalg.norm(local))[0]


def back_project(cam: CameraConfig, u: float, v: float, distance: float) -> Vec3:
    """World point at *distance* along the ray through (u, v); inverse of project_point."""
    return cam.position + distance * pixel_ray(cam, u, v)
