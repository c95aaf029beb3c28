"""
Known-pose linear triangulation of tracks.
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.domain.entities.camera import CameraConfig
from src.domain.entities.counting import Landmark, Track, TriangulationConfig

logger = logging.getLogger(__name__)


def triangulate(
    track: Track,
    cams: Sequence[CameraConfig],
    cfg: TriangulationConfig = TriangulationConfig(),
) -> Optional[Landmark]:
    """DLT triangulation of the track's bbox centres; None when degenerate or inconsistent.

    Rejected when: fewer than two views, camera baseline below cfg.min_baseline,
    the point lies behind any camera, the widest ray-pair angle is below
    cfg.min_parallax, or the mean reprojection error exceeds
    cfg.max_reprojection_error pixels.
    """
    if len(track) < 2:
        return None
    views = [cams[d.frame] for d in track.detections]
    centers = np.array([d.center for d in track.detections])
    positions = np.array([c.position for c in views])

    baseline = max(float(np.linalg.norm(a - b)) for a, b in itertools.combinations(positions, 2))
    if baseline < cfg.min_baseline:
        return None

    projections = [c.projection_matrix() for c in views]
    rows = []
    for p, (u, v) in zip(projections, centers):
        rows.append(u * p[2] - p[0])
        rows.append(v * p[2] - p[1])
    a = np.array(rows)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    _, _, vt = np.linalg.svd(a)
    hom = vt[-1]
    if abs(hom[3]) < 1e-12:
        return None
    point = hom[:3] / hom[3]

    rays = point - positions
    if any(c.to_camera(point)[0, 0] <= 0 for c in views):
        return None
    units = rays / np.linalg.norm(rays, axis=1, keepdims=True)
    cos_min = float(np.min(units @ units.T))
    if math.acos(min(1.0, max(-1.0, cos_min))) < cfg.min_parallax:
        return None

    hom_point = np.append(point, 1.0)
    errors = []
    for p, (u, v) in zip(projections, centers):
        x = p @ hom_point
        errors.append(math.hypot(x[0] / x[2] - u, x[1] / x[2] - v))
    error = float(np.mean(errors))
    if error > cfg.max_reprojection_error:
        return None

    return Landmark(point, track.track_id, len(track), error, track.majority_fruit())
