"""
Free-space pyramids from a single depth frame, and segment certification.

A pyramid is a pixel rectangle of the depth image extruded from the camera apex
to a base depth d_base. It is certified free for a sphere of the vehicle radius r
when every (3x3-eroded) forward depth inside the rectangle exceeds d_base + r and
certified points keep r from every side face. Rectangles grow greedily from the
query pixel one row or column at a time, cycling left, right, up, down. A query
first tries the deepest base and falls back to shallower ones, whose clear
region is wider.

No pyramid can certify points close to its apex. A sample within
APEX_BALL_FACTOR * r of the apex is accepted only if it lies in front of the
camera, projects into the image and its forward depth plus r stays below the
eroded free depth of its own pixel. The apex itself, the vehicle's current
position, is always accepted.
"""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import minimum_filter

from src.domain.entities.depth_image import DepthImage
from src.domain.entities.geometry import Vec3, as_vec3
from src.domain.entities.planner import PolySegment, Pyramid, VehicleLimits

logger = logging.getLogger(__name__)

BASE_EPS = 1e-3
# Depths (m) beyond the query point tried for the pyramid base, deepest first.
BASE_EXTENSIONS = (1.0, 0.5, 0.2)
APEX_BALL_FACTOR = 3.0
APEX_EPS = 1e-9


def free_depths(depth: DepthImage) -> NDArray[np.float64]:
    """Forward depths with no-hit pixels clamped to far, eroded with a 3x3 minimum filter."""
    axis = np.minimum(depth.axis_depths, depth.camera.far)
    return minimum_filter(axis, size=3, mode="nearest")


def depth_to_pyramid(
    depth: DepthImage,
    query_point: Vec3,
    limits: VehicleLimits,
    free: Optional[NDArray[np.float64]] = None,
) -> Optional[Pyramid]:
    """Largest greedy pyramid containing *query_point*, or None.

    *free* may carry a precomputed free_depths(depth) for repeated queries.
    """
    cam = depth.camera
    q = as_vec3(query_point)
    local = cam.to_camera(q)[0]
    x = float(local[0])
    if not x > 0:
        return None
    u = cam.cx - cam.fx * local[1] / x
    v = cam.cy - cam.fy * local[2] / x
    if not (0.0 <= u < cam.image_width and 0.0 <= v < cam.image_height):
        return None
    i, j = int(math.floor(u)), int(math.floor(v))
    if free is None:
        free = free_depths(depth)

    r = limits.radius
    deepest = float(free[j, i]) - r - BASE_EPS
    if deepest < x:
        return None
    tried: set[float] = set()
    for extension in BASE_EXTENSIONS:
        d_base = min(deepest, x + extension)
        if d_base in tried:
            continue
        tried.add(d_base)
        pyramid = _grow_pyramid(depth, free, i, j, d_base, r)
        if pyramid.contains(q[None])[0]:
            return pyramid
    return None


def _grow_pyramid(
    depth: DepthImage,
    free: NDArray[np.float64],
    i: int,
    j: int,
    d_base: float,
    r: float,
) -> Pyramid:
    cam = depth.camera
    clear = free > d_base + r
    u0, v0, u1, v1 = i, j, i + 1, j + 1
    growing = True
    while growing:
        growing = False
        if u0 > 0 and clear[v0:v1, u0 - 1].all():
            u0 -= 1
            growing = True
        if u1 < cam.image_width and clear[v0:v1, u1].all():
            u1 += 1
            growing = True
        if v0 > 0 and clear[v0 - 1, u0:u1].all():
            v0 -= 1
            growing = True
        if v1 < cam.image_height and clear[v1, u0:u1].all():
            v1 += 1
            growing = True
    return Pyramid(cam, (u0, v0, u1, v1), d_base, r)


def near_apex_clear(
    depth: DepthImage,
    points: NDArray[np.float64],
    limits: VehicleLimits,
    free: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.bool_]:
    """Mask of the points certified without a pyramid (see module docstring)."""
    cam = depth.camera
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    r = limits.radius
    dist = np.linalg.norm(pts - cam.position, axis=1)
    local = cam.to_camera(pts)
    x = local[:, 0]
    ok = np.zeros(pts.shape[0], dtype=bool)
    near = np.flatnonzero((dist < APEX_BALL_FACTOR * r) & (x > 0))
    if near.size:
        if free is None:
            free = free_depths(depth)
        xn = x[near]
        u = cam.cx - cam.fx * local[near, 1] / xn
        v = cam.cy - cam.fy * local[near, 2] / xn
        inside = (u >= 0.0) & (u < cam.image_width) & (v >= 0.0) & (v < cam.image_height)
        i = np.clip(np.floor(u).astype(np.int64), 0, cam.image_width - 1)
        j = np.clip(np.floor(v).astype(np.int64), 0, cam.image_height - 1)
        ok[near] = inside & (xn + r <= free[j, i])
    return ok | (dist <= APEX_EPS)


def segment_collision_free(
    seg: PolySegment,
    pyramids: list[Pyramid],
    depth: DepthImage,
    limits: VehicleLimits,
    dt: float,
    free: Optional[NDArray[np.float64]] = None,
) -> bool:
    """True iff every sample of *seg* lies in a certified pyramid or passes near_apex_clear.

    Missing pyramids are generated on demand and appended to *pyramids*, which
    acts as a cache across candidates of one planning step.
    """
    points = np.atleast_2d(seg.position(seg.sample_times(dt)))
    if free is None:
        free = free_depths(depth)
    remaining = ~near_apex_clear(depth, points, limits, free)
    for pyramid in pyramids:
        if not remaining.any():
            return True
        remaining &= ~pyramid.contains(points)
    while remaining.any():
        first = int(np.flatnonzero(remaining)[0])
        pyramid = depth_to_pyramid(depth, points[first], limits, free)
        if pyramid is None:
            return False
        pyramids.append(pyramid)
        remaining &= ~pyramid.contains(points)
    return True
