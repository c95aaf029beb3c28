"""
Flight-height and camera-mount parameter sweeps.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from src.application.geometry.bvh import build_bvh
from src.application.orchard.generator import generate_orchard
from src.application.services.coverage_paths import (
    aim_side_mounts,
    canopy_band,
    lawnmower_path,
    mount_cameras,
    row_center_lines,
    side_aim_pitch,
    straight_row_path,
)
from src.application.services.visibility import count_visible
from src.domain.entities.orchard import OrchardLayout, OrchardModel, TreeParams
from src.domain.entities.trajectory import (
    MountSet,
    PathPattern,
    PoseSequence,
    SweepCell,
    SweepRow,
    SweepSpec,
    SweepTable,
)

logger = logging.getLogger(__name__)


def sweep_paths(model: OrchardModel, pattern: PathPattern, height: float, sample_spacing: float) -> list[PoseSequence]:
    if pattern is PathPattern.LAWNMOWER:
        region = model.bounds
        return [lawnmower_path(region, model.layout.row_spacing, height, sample_spacing)]
    return [straight_row_path(a, b, height, sample_spacing) for a, b in row_center_lines(model)]


def _seed_rows(
    spec: SweepSpec,
    params: TreeParams,
    layout: OrchardLayout,
    seed: int,
) -> dict[tuple[float, str], SweepRow]:
    model = generate_orchard(params, layout, seed)
    bvh = build_bvh(model.triangles)
    rows: dict[tuple[float, str], SweepRow] = {}
    bottom, top = canopy_band(model)
    for height in spec.heights:
        paths = sweep_paths(model, spec.pattern, height, spec.sample_spacing)
        # Side cameras look at mid-canopy of the row half a row spacing away.
        aim = side_aim_pitch(height, 0.5 * (bottom + top), layout.row_spacing / 2.0)
        for mount_set in spec.mount_sets:
            mounts = aim_side_mounts(mount_set.mounts, aim)
            cams = [cam for seq in paths for cam in mount_cameras(seq, mounts)]
            report = count_visible(cams, model, bvh)
            rows[(height, mount_set.name)] = SweepRow(
                height=height,
                mounts=mount_set.name,
                seed=seed,
                n_visible=report.n_visible,
                total_fruits=report.total_fruits,
            )
    logger.info("sweep seed done seed=%d cells=%d", seed, len(rows))
    return rows


def summarize_rows(rows: Sequence[SweepRow], heights: Sequence[float], mount_sets: Sequence[MountSet]) -> tuple[SweepCell, ...]:
    """Mean and sample standard deviation of the visible fraction per (height, mount set)."""
    cells = []
    for height in heights:
        for mount_set in mount_sets:
            fractions = np.array(
                [r.fraction for r in rows if r.height == height and r.mounts == mount_set.name]
            )
            std = float(fractions.std(ddof=1)) if fractions.size > 1 else 0.0
            cells.append(SweepCell(height, mount_set.name, float(fractions.mean()), std, int(fractions.size)))
    return tuple(cells)


def run_sweep(
    spec: SweepSpec,
    params: TreeParams,
    layout: OrchardLayout,
    max_workers: int = 1,
) -> SweepTable:
    """One row per (height, mount set, seed) in SweepSpec order, plus per-(height, mount set) means.

    Each seed's orchard and BVH are built once and shared by all its heights and
    mount sets.
    """
    if max_workers > 1 and len(spec.seeds) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_seed = list(pool.map(lambda s: _seed_rows(spec, params, layout, s), spec.seeds))
    else:
        per_seed = [_seed_rows(spec, params, layout, s) for s in spec.seeds]

    rows = tuple(
        seed_rows[(height, mount_set.name)]
        for height in spec.heights
        for mount_set in spec.mount_sets
        for seed_rows in per_seed
    )
    table = SweepTable(rows, summarize_rows(rows, spec.heights, spec.mount_sets))
    for mount_set in spec.mount_sets:
        logger.info(
            "sweep summary mounts=%s best_height=%s interior_max=%s",
            mount_set.name,
            table.best_height(mount_set.name),
            table.has_interior_maximum(mount_set.name),
        )
    return table


def sweep_csv_rows(table: SweepTable) -> list[dict]:
    return [
        {
            "height_m": r.height,
            "mounts": r.mounts,
            "seed": r.seed,
            "n_visible": r.n_visible,
            "total_fruits": r.total_fruits,
            "fraction": r.fraction,
        }
        for r in table.rows
    ]
