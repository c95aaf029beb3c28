"""
Synthetic per-frame fruit detections from projected visible fruits.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from src.application.geometry.bvh import Bvh
from src.application.orchard.rng import substream
from src.application.services.depth_render import project_points
from src.application.services.visibility import occluder_mask, visible_fruits_one
from src.domain.entities.camera import CameraConfig
from src.domain.entities.counting import BBox, Detection, NoiseModel
from src.domain.entities.orchard import OrchardModel

logger = logging.getLogger(__name__)

# Half-size range (px) of injected false-positive boxes.
FP_HALF_SIZE = (2.0, 8.0)

Frames = list[tuple[Detection, ...]]


def _clip(cam: CameraConfig, u: float, v: float, hu: float, hv: float) -> Optional[BBox]:
    u_min, u_max = max(0.0, u - hu), min(float(cam.image_width), u + hu)
    v_min, v_max = max(0.0, v - hv), min(float(cam.image_height), v + hv)
    if not (u_min < u_max and v_min < v_max):
        return None
    return (u_min, v_min, u_max, v_max)


def detect_frame(
    frame: int,
    cam: CameraConfig,
    orchard: OrchardModel,
    bvh: Bvh,
    noise: NoiseModel,
    mask: Optional[np.ndarray] = None,
) -> tuple[Detection, ...]:
    """Detections of one frame; its randomness comes from the noise substream of that frame."""
    rng = substream(noise.seed, "noise", frame)
    keys = sorted(visible_fruits_one(cam, orchard, bvh, mask=mask))
    out: list[Detection] = []
    if keys:
        idx = [orchard.fruit_index[k] for k in keys]
        uv, depth = project_points(cam, orchard.fruit_centers[idx])
        radii = orchard.fruit_radii[idx]
        for key, (u, v), x, r in zip(keys, uv, depth, radii):
            if noise.p_miss > 0 and rng.random() < noise.p_miss:
                continue
            if noise.sigma_px > 0:
                du, dv = rng.normal(0.0, noise.sigma_px, size=2)
                u, v = u + du, v + dv
            bbox = _clip(cam, float(u), float(v), cam.fx * r / x, cam.fy * r / x)
            if bbox is None:
                continue
            confidence = float(rng.uniform(noise.c_lo_true, 1.0))
            out.append(Detection(frame, bbox, confidence, key))

    n_fp = int(rng.poisson(noise.fp_rate)) if noise.fp_rate > 0 else 0
    for _ in range(n_fp):
        u = float(rng.uniform(0.0, cam.image_width))
        v = float(rng.uniform(0.0, cam.image_height))
        hu, hv = rng.uniform(*FP_HALF_SIZE, size=2)
        bbox = _clip(cam, u, v, float(hu), float(hv))
        if bbox is not None:
            out.append(Detection(frame, bbox, float(rng.uniform(0.0, noise.c_hi_fp))))
    return tuple(out)


def synth_detections(
    cams: Sequence[CameraConfig],
    orchard: OrchardModel,
    bvh: Bvh,
    noise: NoiseModel,
    max_workers: int = 1,
) -> Frames:
    """Per-frame detections for cameras ordered as frames (frame k is cams[k])."""
    mask = occluder_mask(bvh)

    def one(frame: int) -> tuple[Detection, ...]:
        return detect_frame(frame, cams[frame], orchard, bvh, noise, mask)

    if max_workers > 1 and len(cams) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            frames = list(pool.map(one, range(len(cams))))
    else:
        frames = [one(k) for k in range(len(cams))]
    logger.debug("detections synthesized frames=%d total=%d", len(frames), sum(len(f) for f in frames))
    return frames
