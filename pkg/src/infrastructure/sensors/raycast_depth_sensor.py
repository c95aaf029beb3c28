"""
Infrastructure adapter: BVH ray casting → IDepthSensor.
"""

import logging

from src.application.geometry.bvh import Bvh
from src.application.services.depth_render import render_depth
from src.domain.entities.camera import CameraConfig
from src.domain.entities.depth_image import DepthImage
from src.domain.ports.depth_sensor_port import IDepthSensor

logger = logging.getLogger(__name__)


class RaycastDepthSensor(IDepthSensor):
    """Renders noiseless depth frames from a prebuilt BVH."""

    def __init__(self, bvh: Bvh, max_workers: int = 1) -> None:
        self._bvh = bvh
        self._max_workers = max_workers
        self.frames = 0

    def capture(self, camera: CameraConfig) -> DepthImage:
        image = render_depth(camera, self._bvh, max_workers=self._max_workers)
        self.frames += 1
        logger.debug("depth frame=%d position=%s", self.frames, camera.position.tolist())
        return image
