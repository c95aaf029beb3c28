"""
End-to-end synthetic counting: detect -> track -> triangulate -> cluster.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

from src.application.counting.clustering import cluster_landmarks
from src.application.counting.detections import synth_detections
from src.application.counting.tracker import track
from src.application.counting.triangulation import triangulate
from src.application.geometry.bvh import Bvh, build_bvh
from src.application.services.visibility import count_visible
from src.domain.entities.camera import CameraConfig
from src.domain.entities.counting import (
    ClusterConfig,
    ClusterReport,
    ConfusionSummary,
    CountResult,
    Landmark,
    NoiseModel,
    TrackerConfig,
    TriangulationConfig,
)
from src.domain.entities.orchard import FruitKey, OrchardModel

logger = logging.getLogger(__name__)


def attribute_clusters(report: ClusterReport, landmarks: Sequence[Landmark]) -> dict[int, tuple[FruitKey, ...]]:
    """Cluster index -> sorted ground-truth fruits among its landmarks."""
    return {
        k: tuple(sorted({landmarks[i].gt_fruit_id for i in c.members if landmarks[i].gt_fruit_id is not None}))
        for k, c in enumerate(report.clusters)
    }


def confusion_summary(
    attribution: dict[int, tuple[FruitKey, ...]],
    visible: set[FruitKey],
) -> ConfusionSummary:
    appearances: dict[FruitKey, int] = {}
    for fruits in attribution.values():
        for key in fruits:
            appearances[key] = appearances.get(key, 0) + 1
    return ConfusionSummary(
        merged_clusters=sum(1 for fruits in attribution.values() if len(fruits) > 1),
        split_fruits=sum(1 for n in appearances.values() if n > 1),
        phantom_clusters=sum(1 for fruits in attribution.values() if not fruits),
        missed_fruits=len(visible - set(appearances)),
    )


def count_pipeline(
    cams: Sequence[CameraConfig],
    orchard: OrchardModel,
    noise: NoiseModel = NoiseModel(),
    tracker_cfg: TrackerConfig = TrackerConfig(),
    cluster_cfg: ClusterConfig = ClusterConfig(),
    triangulation_cfg: TriangulationConfig = TriangulationConfig(),
    bvh: Optional[Bvh] = None,
    max_workers: int = 1,
) -> CountResult:
    if bvh is None:
        bvh = build_bvh(orchard.triangles)
    frames = synth_detections(cams, orchard, bvh, noise, max_workers)
    tracks = track(frames, tracker_cfg)
    landmarks = tuple(lm for lm in (triangulate(t, cams, triangulation_cfg) for t in tracks) if lm is not None)
    eps = cluster_cfg.eps if cluster_cfg.eps is not None else 2.0 * orchard.params.fruit_radius
    clusters = cluster_landmarks(landmarks, eps, cluster_cfg.min_pts)

    visible = set(count_visible(cams, orchard, bvh, max_workers).visible_keys)
    detected = {d.gt_fruit_id for frame in frames for d in frame if d.gt_fruit_id is not None}
    attribution = attribute_clusters(clusters, landmarks)
    result = CountResult(
        estimated_count=clusters.estimated_count,
        ground_truth_visible_count=len(visible),
        ground_truth_detected_count=len(detected),
        confusion=confusion_summary(attribution, visible),
        attribution=attribution,
        detections=tuple(frames),
        tracks=tuple(tracks),
        landmarks=landmarks,
        clusters=clusters,
    )
    logger.info(
        "count pipeline frames=%d tracks=%d landmarks=%d estimated=%d ground_truth=%d",
        len(frames),
        len(tracks),
        len(landmarks),
        result.estimated_count,
        result.ground_truth_visible_count,
    )
    return result
