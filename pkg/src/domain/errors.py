"""
Domain exception hierarchy.
Every error raised deliberately by canopysim derives from CanopySimError so the
CLI can map failures onto exit codes without inspecting library exceptions.
"""


class CanopySimError(Exception):
    """Root of all simulator errors."""


class ConfigError(CanopySimError):
    """Experiment configuration is invalid or references unknown presets."""


class GeometryError(CanopySimError, ValueError):
    """Invalid geometric input (non-unit ray direction, bad frustum, ...)."""


class PlanningError(CanopySimError, ValueError):
    """Invalid planner arguments."""


class SceneFormatError(CanopySimError):
    """A scene file could not be parsed.

    Attributes:
        offset: Byte offset at which parsing failed.
    """

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class SceneVersionError(SceneFormatError):
    """Scene file has an unsupported version or unknown header fields."""
