"""
Port (interface) for depth sensors feeding the local planner.
RaycastDepthSensor renders frames from the orchard mesh; a hardware driver
would implement the same interface.
"""

from abc import ABC, abstractmethod

from src.domain.entities.camera import CameraConfig
from src.domain.entities.depth_image import DepthImage


class IDepthSensor(ABC):
    @abstractmethod
    def capture(self, camera: CameraConfig) -> DepthImage: ...
