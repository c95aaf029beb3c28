"""
Two-stage IoU tracker.

Per frame, stage 1 matches high-confidence detections against every live
(active or lost) track; stage 2 gives the still-unmatched active tracks a chance
to absorb low-confidence detections. Both stages use optimal assignment on
1 - IoU with an IoU floor. Track boxes are predicted with a constant-velocity
model on the box centre, corrected towards each measurement by blend_gain.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment

from src.domain.entities.counting import Detection, Track, TrackerConfig, TrackState

logger = logging.getLogger(__name__)

_INFEASIBLE = 1e6


def iou_matrix(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    """Pairwise IoU of boxes a (N, 4) and b (M, 4) given as (u_min, v_min, u_max, v_max)."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    w = np.clip(np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0]), 0, None)
    h = np.clip(np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1]), 0, None)
    inter = w * h
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)


@dataclass
class _LiveTrack:
    track_id: int
    detections: list[Detection]
    center: NDArray[np.float64]
    size: NDArray[np.float64]
    last_frame: int
    velocity: NDArray[np.float64] = field(default_factory=lambda: np.zeros(2))
    misses: int = 0
    state: TrackState = TrackState.ACTIVE

    def predicted_box(self, frame: int) -> NDArray[np.float64]:
        c = self.center + self.velocity * (frame - self.last_frame)
        half = self.size / 2.0
        return np.concatenate([c - half, c + half])

    def update(self, det: Detection, frame: int, gain: float) -> None:
        u_min, v_min, u_max, v_max = det.bbox
        measured = np.array([(u_min + u_max) / 2.0, (v_min + v_max) / 2.0])
        gap = frame - self.last_frame
        predicted = self.center + self.velocity * gap
        corrected = predicted + gain * (measured - predicted)
        self.velocity = (corrected - self.center) / gap
        self.center = corrected
        self.size = np.array([u_max - u_min, v_max - v_min])
        self.last_frame = frame
        self.detections.append(det)
        self.misses = 0
        self.state = TrackState.ACTIVE

    def freeze(self) -> Track:
        return Track(self.track_id, tuple(self.detections), self.state)


def _associate(
    tracks: list[_LiveTrack],
    dets: list[Detection],
    frame: int,
    iou_min: float,
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Optimal IoU assignment; returns matched (track, det) index pairs and the unmatched indices."""
    if not tracks or not dets:
        return [], list(range(len(tracks))), list(range(len(dets)))
    predicted = np.stack([t.predicted_box(frame) for t in tracks])
    boxes = np.array([d.bbox for d in dets])
    iou = iou_matrix(predicted, boxes)
    cost = np.where(iou >= iou_min, 1.0 - iou, _INFEASIBLE)
    rows, cols = linear_sum_assignment(cost)
    matches = [(int(r), int(c)) for r, c in zip(rows, cols) if iou[r, c] >= iou_min]
    matched_t = {r for r, _ in matches}
    matched_d = {c for _, c in matches}
    return (
        matches,
        [i for i in range(len(tracks)) if i not in matched_t],
        [j for j in range(len(dets)) if j not in matched_d],
    )


def track(frames: Sequence[Sequence[Detection]], cfg: TrackerConfig = TrackerConfig()) -> list[Track]:
    """Tracks in creation order; frame k of *frames* is frame index k."""
    live: list[_LiveTrack] = []
    done: list[_LiveTrack] = []
    next_id = 0

    for frame, dets in enumerate(frames):
        high = [d for d in dets if d.confidence >= cfg.tau_high]
        low = [d for d in dets if cfg.tau_low <= d.confidence < cfg.tau_high] if cfg.two_stage else []

        matches, unmatched_tracks, unmatched_high = _associate(live, high, frame, cfg.iou_min)
        for ti, di in matches:
            live[ti].update(high[di], frame, cfg.blend_gain)

        rescued: set[int] = set()
        candidates = [ti for ti in unmatched_tracks if live[ti].state is TrackState.ACTIVE]
        if candidates and low:
            pairs, _, _ = _associate([live[ti] for ti in candidates], low, frame, cfg.iou_min)
            for ci, di in pairs:
                live[candidates[ci]].update(low[di], frame, cfg.blend_gain)
                rescued.add(candidates[ci])

        for ti in unmatched_tracks:
            if ti in rescued:
                continue
            t = live[ti]
            t.misses += 1
            t.state = TrackState.FINISHED if t.misses >= cfg.max_age else TrackState.LOST

        for di in unmatched_high:
            d = high[di]
            u_min, v_min, u_max, v_max = d.bbox
            live.append(
                _LiveTrack(
                    track_id=next_id,
                    detections=[d],
                    center=np.array([(u_min + u_max) / 2.0, (v_min + v_max) / 2.0]),
                    size=np.array([u_max - u_min, v_max - v_min]),
                    last_frame=frame,
                )
            )
            next_id += 1

        done.extend(t for t in live if t.state is TrackState.FINISHED)
        live = [t for t in live if t.state is not TrackState.FINISHED]

    result = sorted(done + live, key=lambda t: t.track_id)
    logger.debug("tracking done frames=%d tracks=%d", len(frames), len(result))
    return [t.freeze() for t in result]
