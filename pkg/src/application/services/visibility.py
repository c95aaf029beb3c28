"""
Occlusion-aware visible-fruit counting.

For every camera: cull fruit centres against the frustum, then cast one ray from
the apex to each surviving centre and test it against the occluder triangles
(trunk, branch, leaf) in the open interval (EPS_RAY, t_center - EPS_RAY).
Observations across cameras form a multiset; the visible count is the size of
its deduplicated (tree_id, fruit_id) set.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from src.application.geometry.bvh import Bvh, build_bvh
from src.application.geometry.frustum import frustum_contains_points
from src.application.geometry.intersect import EPS_RAY
from src.domain.entities.camera import CameraConfig
from src.domain.entities.geometry import OCCLUDER_KINDS
from src.domain.entities.orchard import FruitKey, OrchardModel
from src.domain.entities.visibility import HeightLayer, Observation, VisibilityHeatmap, VisibilityReport

logger = logging.getLogger(__name__)

DEFAULT_BIN_SIZE = 0.5


def occluder_mask(bvh: Bvh) -> NDArray[np.bool_]:
    return bvh.triangles.kind_mask(OCCLUDER_KINDS)


def visible_fruits_one(
    cam: CameraConfig,
    orchard: OrchardModel,
    bvh: Bvh,
    fruits_occlude: bool = False,
    mask: Optional[NDArray[np.bool_]] = None,
) -> set[FruitKey]:
    """Fruits whose centre lies in the frustum of *cam* and whose centre ray is unobstructed.

    With fruits_occlude=True every triangle occludes except those of the target
    fruit itself; otherwise only trunk, branch and leaf triangles do. *mask* can
    carry a precomputed occluder mask to avoid rebuilding it per camera.
    """
    centers = orchard.fruit_centers
    if centers.shape[0] == 0:
        return set()
    candidates = np.flatnonzero(frustum_contains_points(cam.frustum(), centers))
    if candidates.size == 0:
        return set()

    delta = centers[candidates] - cam.position
    dist = np.linalg.norm(delta, axis=1)
    dirs = delta / dist[:, None]
    t_max = dist - EPS_RAY
    keys = orchard.fruit_keys

    origins = np.broadcast_to(cam.position, dirs.shape)

    if not fruits_occlude:
        if mask is None:
            mask = occluder_mask(bvh)
        blocked = bvh.any_hit(origins, dirs, t_max, mask)
        return {keys[i] for i in candidates[~blocked]}

    _, tri = bvh.nearest_hit(origins, dirs, t_max)
    soup = bvh.triangles
    visible: set[FruitKey] = set()
    for i, hit in zip(candidates, tri):
        if hit < 0 or (int(soup.tree_ids[hit]), int(soup.fruit_ids[hit])) == keys[i]:
            visible.add(keys[i])
    return visible


def count_visible(
    cams: Sequence[CameraConfig],
    orchard: OrchardModel,
    bvh: Optional[Bvh] = None,
    max_workers: int = 1,
    fruits_occlude: bool = False,
) -> VisibilityReport:
    """Union of visible_fruits_one over *cams*, with the per-camera observation multiset."""
    if bvh is None:
        bvh = build_bvh(orchard.triangles)
    mask = occluder_mask(bvh)

    def one(cam: CameraConfig) -> set[FruitKey]:
        return visible_fruits_one(cam, orchard, bvh, fruits_occlude, mask)

    if max_workers > 1 and len(cams) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_camera = list(pool.map(one, cams))
    else:
        per_camera = [one(cam) for cam in cams]

    observations = tuple(
        Observation(tree_id, fruit_id, index)
        for index, seen in enumerate(per_camera)
        for tree_id, fruit_id in sorted(seen)
    )
    visible_keys = tuple(sorted(set().union(*per_camera))) if per_camera else ()
    if visible_keys:
        positions = orchard.fruit_centers[[orchard.fruit_index[k] for k in visible_keys]]
    else:
        positions = np.zeros((0, 3))

    per_tree_total = orchard.fruits_per_tree()
    per_tree_visible = {tree_id: 0 for tree_id in per_tree_total}
    for tree_id, _ in visible_keys:
        per_tree_visible[tree_id] = per_tree_visible.get(tree_id, 0) + 1

    report = VisibilityReport(
        observations=observations,
        visible_keys=visible_keys,
        visible_fruit_positions=positions,
        total_fruits=orchard.total_fruits,
        per_tree_visible=per_tree_visible,
        per_tree_total=per_tree_total,
    )
    logger.debug(
        "visibility counted cameras=%d observations=%d n_visible=%d total=%d",
        len(cams),
        len(observations),
        report.n_visible,
        report.total_fruits,
    )
    return report


def visibility_heatmap(
    report: VisibilityReport,
    orchard: Optional[OrchardModel] = None,
    bin_size: float = DEFAULT_BIN_SIZE,
) -> VisibilityHeatmap:
    """3-D histogram of visible fruit centres; bins sit on the global grid of multiples of bin_size.

    *orchard* is accepted for signature symmetry with the other reporting
    functions; the grid only spans the occupied bins.
    """
    if not bin_size > 0:
        raise ValueError(f"bin_size must be > 0, got {bin_size!r}")
    positions = report.visible_fruit_positions
    if positions.shape[0] == 0:
        return VisibilityHeatmap(np.zeros(3), bin_size, np.zeros((0, 0, 0), dtype=np.int64))
    idx = np.floor(positions / bin_size).astype(np.int64)
    lo = idx.min(axis=0)
    shape = tuple(int(n) for n in idx.max(axis=0) - lo + 1)
    counts = np.zeros(shape, dtype=np.int64)
    np.add.at(counts, tuple((idx - lo).T), 1)
    return VisibilityHeatmap(lo * bin_size, bin_size, counts)


def vertical_profile(
    report: VisibilityReport,
    orchard: OrchardModel,
    layer_height: float = DEFAULT_BIN_SIZE,
) -> list[HeightLayer]:
    """Visible and total fruit counts per horizontal canopy layer, bottom to top."""
    if not layer_height > 0:
        raise ValueError(f"layer_height must be > 0, got {layer_height!r}")
    all_z = orchard.fruit_centers[:, 2]
    if all_z.size == 0:
        return []
    k_lo = math.floor(all_z.min() / layer_height)
    k_hi = math.floor(all_z.max() / layer_height)
    n = k_hi - k_lo + 1
    total = np.bincount(np.floor(all_z / layer_height).astype(np.int64) - k_lo, minlength=n)
    visible_z = report.visible_fruit_positions[:, 2]
    visible = np.bincount(np.floor(visible_z / layer_height).astype(np.int64) - k_lo, minlength=n)
    return [
        HeightLayer(
            z_min=(k_lo + i) * layer_height,
            z_max=(k_lo + i + 1) * layer_height,
            visible=int(visible[i]),
            total=int(total[i]),
        )
        for i in range(n)
    ]


def observation_rows(report: VisibilityReport, orchard: OrchardModel) -> list[dict]:
    """Flat CSV/JSON rows: camera_index, tree_id, fruit_id, x, y, z."""
    rows = []
    for obs in report.observations:
        x, y, z = orchard.fruit_centers[orchard.fruit_index[obs.key]]
        rows.append(
            {
                "camera_index": obs.camera_index,
                "tree_id": obs.tree_id,
                "fruit_id": obs.fruit_id,
                "x": float(x),
                "y": float(y),
                "z": float(z),
            }
        )
    return rows
