"""
Domain entities for the synthetic fruit-counting pipeline:
detections → tracks → landmarks → clusters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.geometry import Vec3, as_vec3
from src.domain.entities.orchard import FruitKey

BBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class Detection:
    frame: int
    bbox: BBox
    confidence: float
    gt_fruit_id: Optional[FruitKey] = None

    def __post_init__(self) -> None:
        u_min, v_min, u_max, v_max = self.bbox
        if not (u_min < u_max and v_min < v_max):
            raise ValueError(f"degenerate bbox {self.bbox!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence!r}")
        if self.gt_fruit_id is not None:
            object.__setattr__(self, "gt_fruit_id", tuple(int(v) for v in self.gt_fruit_id))

    @property
    def center(self) -> tuple[float, float]:
        u_min, v_min, u_max, v_max = self.bbox
        return ((u_min + u_max) / 2.0, (v_min + v_max) / 2.0)

    def as_dict(self) -> dict:
        return {
            "frame": self.frame,
            "bbox": list(self.bbox),
            "confidence": self.confidence,
            "gt_fruit_id": None if self.gt_fruit_id is None else list(self.gt_fruit_id),
        }


@dataclass(frozen=True)
class NoiseModel:
    sigma_px: float = 0.0
    p_miss: float = 0.0
    fp_rate: float = 0.0
    c_lo_true: float = 1.0
    c_hi_fp: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma_px < 0 or self.fp_rate < 0:
            raise ValueError("sigma_px and fp_rate must be >= 0")
        for name in ("p_miss", "c_lo_true", "c_hi_fp"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")

    @property
    def is_noiseless(self) -> bool:
        return self.sigma_px == 0 and self.p_miss == 0 and self.fp_rate == 0


class TrackState(str, Enum):
    ACTIVE = "active"
    LOST = "lost"
    FINISHED = "finished"


@dataclass(frozen=True)
class TrackerConfig:
    tau_high: float = 0.6
    tau_low: float = 0.1
    iou_min: float = 0.2
    max_age: int = 30
    blend_gain: float = 0.8
    two_stage: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_low <= self.tau_high <= 1.0:
            raise ValueError(f"need 0 <= tau_low <= tau_high <= 1, got {self.tau_low!r}, {self.tau_high!r}")
        if not 0.0 < self.iou_min <= 1.0:
            raise ValueError(f"iou_min must lie in (0, 1], got {self.iou_min!r}")
        if self.max_age < 1:
            raise ValueError(f"max_age must be >= 1, got {self.max_age!r}")
        if not 0.0 < self.blend_gain <= 1.0:
            raise ValueError(f"blend_gain must lie in (0, 1], got {self.blend_gain!r}")


@dataclass(frozen=True)
class Track:
    track_id: int
    detections: tuple[Detection, ...]
    state: TrackState

    def __post_init__(self) -> None:
        frames = [d.frame for d in self.detections]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError(f"track {self.track_id} frames must be strictly increasing")

    def __len__(self) -> int:
        return len(self.detections)

    def majority_fruit(self) -> Optional[FruitKey]:
        """Most frequent ground-truth fruit among the detections (ties → smallest key)."""
        counts: dict[FruitKey, int] = {}
        for d in self.detections:
            if d.gt_fruit_id is not None:
                counts[d.gt_fruit_id] = counts.get(d.gt_fruit_id, 0) + 1
        if not counts:
            return None
        return min(counts, key=lambda k: (-counts[k], k))

    def as_dict(self) -> dict:
        return {
            "track_id": self.track_id,
            "state": self.state.value,
            "detections": [d.as_dict() for d in self.detections],
        }


@dataclass(frozen=True, eq=False)
class Landmark:
    position: Vec3
    track_id: int
    n_views: int
    reprojection_error: float
    gt_fruit_id: Optional[FruitKey] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", as_vec3(self.position))
        if self.n_views < 2:
            raise ValueError(f"landmarks need >= 2 views, got {self.n_views!r}")
        if not np.isfinite(self.reprojection_error):
            raise ValueError("reprojection error must be finite")


@dataclass(frozen=True, eq=False)
class Cluster:
    members: tuple[int, ...]
    centroid: Vec3


@dataclass(frozen=True, eq=False)
class ClusterReport:
    """labels[i] is the cluster index of landmark i, or -1 for noise."""

    clusters: tuple[Cluster, ...]
    noise_landmarks: tuple[int, ...]
    labels: NDArray[np.int64] = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def estimated_count(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class ConfusionSummary:
    merged_clusters: int
    split_fruits: int
    phantom_clusters: int
    missed_fruits: int


@dataclass(frozen=True, eq=False)
class CountResult:
    estimated_count: int
    ground_truth_visible_count: int
    ground_truth_detected_count: int
    confusion: ConfusionSummary
    attribution: dict[int, tuple[FruitKey, ...]]
    detections: tuple[tuple[Detection, ...], ...]
    tracks: tuple[Track, ...]
    landmarks: tuple[Landmark, ...]
    clusters: ClusterReport


@dataclass(frozen=True)
class TriangulationConfig:
    max_reprojection_error: float = 3.0
    min_baseline: float = 0.05
    min_parallax: float = float(np.radians(1.0))


@dataclass(frozen=True)
class ClusterConfig:
    """eps=None means 2 x the orchard's fruit radius."""

    eps: Optional[float] = None
    min_pts: int = 1

    def __post_init__(self) -> None:
        if self.eps is not None and not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps!r}")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts!r}")
