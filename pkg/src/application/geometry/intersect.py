"""
Ray/triangle intersection and point/triangle distance kernels.

All kernels are written as elementwise numpy expressions over (N, 3) arrays with
explicit component arithmetic, so a single ray and a batch of rays produce
bit-identical results (the BVH and the scalar API share moller_trumbore).
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.geometry import Ray, Triangle

EPS_RAY = 1e-6
# |e1 x e2|^2 at or below this is treated as a degenerate (zero-area) triangle.
DEGENERATE_CROSS_SQ = 1e-28


def _dot(a: NDArray, b: NDArray) -> NDArray:
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _cross(a: NDArray, b: NDArray) -> NDArray:
    return np.stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )


def moller_trumbore(
    origins: NDArray[np.float64],
    dirs: NDArray[np.float64],
    v0: NDArray[np.float64],
    v1: NDArray[np.float64],
    v2: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Ray parameter of the hit for each (ray, triangle) row, np.inf on a miss.

    Hits require strictly interior barycentrics (u > 0, v > 0, u + v < 1) and
    t > EPS_RAY. Degenerate triangles and rays parallel to the plane never hit.
    """
    e1 = v1 - v0
    e2 = v2 - v0
    normal = _cross(e1, e2)
    p = _cross(dirs, e2)
    det = _dot(e1, p)
    valid = (det != 0.0) & (_dot(normal, normal) > DEGENERATE_CROSS_SQ)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
        s = origins - v0
        u = _dot(s, p) * inv_det
        q = _cross(s, e1)
        v = _dot(dirs, q) * inv_det
        t = _dot(e2, q) * inv_det
    hit = valid & (u > 0.0) & (v > 0.0) & (u + v < 1.0) & (t > EPS_RAY)
    return np.where(hit, t, np.inf)


def ray_triangle_intersect(ray: Ray, tri: Triangle, t_max: float) -> Optional[float]:
    """Smallest t in (EPS_RAY, t_max) where *ray* crosses the interior of *tri*, else None."""
    if not t_max > 0:
        raise ValueError(f"t_max must be > 0, got {t_max!r}")
    t = moller_trumbore(
        ray.origin.reshape(1, 3),
        ray.dir.reshape(1, 3),
        tri.v0.reshape(1, 3),
        tri.v1.reshape(1, 3),
        tri.v2.reshape(1, 3),
    )[0]
    return float(t) if t < t_max else None


def closest_points_on_triangles(
    points: NDArray[np.float64],
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    c: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Closest point on triangle (a, b, c) to each point, rowwise (Voronoi-region method)."""
    ab = b - a
    ac = c - a
    ap = points - a
    d1 = _dot(ab, ap)
    d2 = _dot(ac, ap)
    bp = points - b
    d3 = _dot(ab, bp)
    d4 = _dot(ac, bp)
    cp = points - c
    d5 = _dot(ab, cp)
    d6 = _dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    out = np.empty_like(points)
    done = np.zeros(points.shape[0], dtype=bool)

    def assign(mask: NDArray[np.bool_], value: NDArray[np.float64]) -> None:
        sel = mask & ~done
        out[sel] = value[sel]
        done[sel] = True

    with np.errstate(divide="ignore", invalid="ignore"):
        assign((d1 <= 0) & (d2 <= 0), a)
        assign((d3 >= 0) & (d4 <= d3), b)
        assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + (d1 / (d1 - d3))[:, None] * ab)
        assign((d6 >= 0) & (d5 <= d6), c)
        assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + (d2 / (d2 - d6))[:, None] * ac)
        w_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        assign((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + w_bc[:, None] * (c - b))
        denom = 1.0 / (va + vb + vc)
        inside = a + (vb * denom)[:, None] * ab + (vc * denom)[:, None] * ac
        assign(np.ones_like(done), inside)
    return out


def point_triangle_distances(
    points: NDArray[np.float64],
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    c: NDArray[np.float64],
) -> NDArray[np.float64]:
    closest = closest_points_on_triangles(points, a, b, c)
    return np.linalg.norm(points - closest, axis=1)
