"""
Frustum containment tests used for culling before occlusion checks.
Only the point itself is tested; object extent is ignored.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.geometry import Frustum, Vec3

# Absorbs rounding in the world→camera transform for points placed exactly at far.
FAR_REL_TOL = 1e-12


def frustum_contains_points(f: Frustum, points: NDArray[np.float64]) -> NDArray[np.bool_]:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    local = (pts - f.apex) @ f.orientation.as_matrix()
    x, y, z = local[:, 0], local[:, 1], local[:, 2]
    return (
        (x > 0.0)
        & (x <= f.far * (1.0 + FAR_REL_TOL))
        & (np.abs(y) <= x * math.tan(f.hfov / 2.0))
        & (np.abs(z) <= x * math.tan(f.vfov / 2.0))
    )


def frustum_contains(f: Frustum, p: Vec3) -> bool:
    """True iff *p* is in front of the apex, inside both angular bounds and at depth <= far."""
    return bool(frustum_contains_points(f, p)[0])
