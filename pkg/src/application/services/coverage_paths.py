"""
Global data-collection trajectories and camera mounting.

Paths are resampled polylines: every leg of length L is split into
ceil(L / sample_spacing) equal steps, so consecutive samples are never farther
apart than sample_spacing. Times follow from arc length at a constant speed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.camera import CameraConfig, camera_rotation
from src.domain.entities.geometry import Aabb, Vec3, as_vec3
from src.domain.entities.orchard import OrchardModel
from src.domain.entities.trajectory import Intrinsics, MountConfig, MountKind, MountSet, PoseSequence

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_SPACING = 0.5
DEFAULT_SPEED = 1.0
GROUND_HEIGHT = 1.0
OVER_CANOPY_CLEARANCE = 4.0
UP_ANGLED_PITCH = math.radians(30.0)
# Fractions of the canopy band flown by the through-canopy passes.
THROUGH_CANOPY_LEVELS = (1.0 / 3.0, 2.0 / 3.0)
MAX_SIDE_AIM_PITCH = math.radians(45.0)
SIDE_MOUNTS = frozenset({MountKind.SIDE_LEFT, MountKind.SIDE_RIGHT})

# (yaw, pitch) of each mount relative to the vehicle heading.
MOUNT_BASE_ANGLES: dict[MountKind, tuple[float, float]] = {
    MountKind.FRONT: (0.0, 0.0),
    MountKind.SIDE_LEFT: (math.pi / 2, 0.0),
    MountKind.SIDE_RIGHT: (-math.pi / 2, 0.0),
    MountKind.DOWN: (0.0, -math.pi / 2),
    MountKind.UP_ANGLED: (math.pi / 2, 0.0),
}


def _polyline_path(
    vertices: Sequence[Vec3],
    leg_headings: Sequence[float],
    sample_spacing: float,
    speed: float,
) -> PoseSequence:
    """Resample a polyline. Samples on leg i (excluding its start vertex) take leg_headings[i]."""
    if not sample_spacing > 0:
        raise ValueError(f"sample_spacing must be > 0, got {sample_spacing!r}")
    if not speed > 0:
        raise ValueError(f"speed must be > 0, got {speed!r}")
    positions = [np.asarray(vertices[0], dtype=np.float64)]
    headings = [leg_headings[0]]
    for start, end, heading in zip(vertices[:-1], vertices[1:], leg_headings):
        start, end = np.asarray(start, dtype=np.float64), np.asarray(end, dtype=np.float64)
        length = float(np.linalg.norm(end - start))
        if length == 0.0:
            continue
        n = max(1, math.ceil(length / sample_spacing))
        for j in range(1, n + 1):
            positions.append(end.copy() if j == n else start + (end - start) * (j / n))
            headings.append(heading)
    positions_arr = np.array(positions)
    steps = np.linalg.norm(np.diff(positions_arr, axis=0), axis=1)
    times = np.concatenate([[0.0], np.cumsum(steps)]) / speed
    return PoseSequence(positions_arr, np.array(headings), times, sample_spacing)


def lawnmower_path(
    region: Aabb,
    row_spacing: float,
    height: float,
    sample_spacing: float = DEFAULT_SAMPLE_SPACING,
    speed: float = DEFAULT_SPEED,
) -> PoseSequence:
    """Boustrophedon passes along x over the xy footprint of *region*, at constant *height*.

    n = max(1, ceil(Ly / row_spacing)) passes sit at the centres of n equal
    strips across y, so a spacing wider than the region yields one central pass.
    Heading snaps to the next pass direction on the turn-around connectors.
    """
    extent = region.extent
    if not (extent[0] > 0 and extent[1] > 0):
        raise ValueError(f"region must be non-degenerate in x and y, extent={extent!r}")
    if not row_spacing > 0:
        raise ValueError(f"row_spacing must be > 0, got {row_spacing!r}")
    n_passes = max(1, math.ceil(extent[1] / row_spacing - 1e-9))
    strip = extent[1] / n_passes
    x0, x1 = float(region.min[0]), float(region.max[0])

    vertices: list[Vec3] = []
    leg_headings: list[float] = []
    for k in range(n_passes):
        y = float(region.min[1]) + (k + 0.5) * strip
        forward = k % 2 == 0
        start = np.array([x0 if forward else x1, y, height])
        end = np.array([x1 if forward else x0, y, height])
        heading = 0.0 if forward else math.pi
        vertices.append(start)
        if k > 0:
            leg_headings.append(heading)  # connector
        vertices.append(end)
        leg_headings.append(heading)
    seq = _polyline_path(vertices, leg_headings, sample_spacing, speed)
    logger.debug("lawnmower path passes=%d samples=%d length=%.2f", n_passes, len(seq), seq.length())
    return seq


def straight_row_path(
    start: Sequence[float],
    end: Sequence[float],
    height: float,
    sample_spacing: float = DEFAULT_SAMPLE_SPACING,
    speed: float = DEFAULT_SPEED,
) -> PoseSequence:
    """ceil(L / sample_spacing) + 1 evenly spaced samples from *start* to *end* (xy) at *height*.

    Both endpoints are included exactly; the heading is constant along the line.
    """
    a = np.array([float(start[0]), float(start[1]), height])
    b = np.array([float(end[0]), float(end[1]), height])
    length = float(np.linalg.norm(b - a))
    if not length > 0:
        raise ValueError("row centre line must have positive length")
    n = math.ceil(length / sample_spacing) + 1
    fractions = np.linspace(0.0, 1.0, n)
    positions = a + (b - a) * fractions[:, None]
    positions[-1] = b
    heading = math.atan2(b[1] - a[1], b[0] - a[0])
    times = fractions * length / speed
    return PoseSequence(positions, np.full(n, heading), times, sample_spacing)


def orbit_path(
    center: Sequence[float],
    radius: float,
    height: float,
    arc: float = 2 * math.pi,
    sample_spacing: float = DEFAULT_SAMPLE_SPACING,
    start_angle: float = 0.0,
    speed: float = DEFAULT_SPEED,
) -> PoseSequence:
    """Counter-clockwise arc of *arc* radians around *center*; a side_left mount faces the centre."""
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius!r}")
    if not 0 < arc <= 2 * math.pi:
        raise ValueError(f"arc must lie in (0, 2pi], got {arc!r}")
    n = math.ceil(radius * arc / sample_spacing) + 1
    if arc == 2 * math.pi:
        n -= 1
        angles = start_angle + arc * np.arange(n) / n
    else:
        angles = start_angle + np.linspace(0.0, arc, n)
    c = as_vec3([center[0], center[1], 0.0])
    positions = np.stack(
        [c[0] + radius * np.cos(angles), c[1] + radius * np.sin(angles), np.full(n, height)],
        axis=1,
    )
    times = (angles - start_angle) * radius / speed
    return PoseSequence(positions, angles + math.pi / 2, times, sample_spacing)


def mount_cameras(seq: PoseSequence, mounts: Sequence[MountConfig]) -> list[CameraConfig]:
    """One camera per (sample, mount), sample-major so sample order is preserved."""
    if len(seq) == 0 or not mounts:
        raise ValueError("mount_cameras needs at least one sample and one mount")
    cams: list[CameraConfig] = []
    for position, heading in zip(seq.positions, seq.headings):
        for mount in mounts:
            base_yaw, base_pitch = MOUNT_BASE_ANGLES[mount.mount]
            orientation = camera_rotation(
                heading + base_yaw + mount.yaw_offset,
                base_pitch + mount.pitch_offset,
            )
            k = mount.intrinsics
            cams.append(CameraConfig(position, orientation, k.hfov, k.vfov, k.far, k.width, k.height))
    return cams


def row_center_lines(model: OrchardModel) -> list[tuple[NDArray, NDArray]]:
    """Centre lines of the alleys between adjacent tree rows, spanning the orchard in x.

    A single-row orchard gets one line on each side of the row.
    """
    layout = model.layout
    x0, x1 = float(model.bounds.min[0]), float(model.bounds.max[0])
    row_y = [(r - (layout.rows - 1) / 2.0) * layout.row_spacing for r in range(layout.rows)]
    if layout.rows == 1:
        alleys = [row_y[0] - layout.row_spacing / 2, row_y[0] + layout.row_spacing / 2]
    else:
        alleys = [(a + b) / 2 for a, b in zip(row_y[:-1], row_y[1:])]
    return [(np.array([x0, y]), np.array([x1, y])) for y in alleys]


def side_aim_pitch(height: float, target_height: float, distance: float) -> float:
    """Pitch that points a side-facing camera at *target_height* on a row *distance* away."""
    pitch = math.atan2(target_height - height, distance)
    return max(-MAX_SIDE_AIM_PITCH, min(MAX_SIDE_AIM_PITCH, pitch))


def aim_side_mounts(mounts: Sequence[MountConfig], pitch: float) -> tuple[MountConfig, ...]:
    """Side-facing mounts get *pitch* added to their own offset; other mounts are unchanged."""
    return tuple(
        replace(m, pitch_offset=m.pitch_offset + pitch) if m.mount in SIDE_MOUNTS else m for m in mounts
    )


def canopy_band(model: OrchardModel) -> tuple[float, float]:
    """(bottom, top) of the canopy: trunk height to the highest vertex."""
    return model.params.trunk_height, float(model.bounds.max[2])


@dataclass(frozen=True)
class Strategy:
    name: str
    paths: tuple[PoseSequence, ...]
    mounts: tuple[tuple[MountConfig, ...], ...]

    def cameras(self) -> list[CameraConfig]:
        """Cameras of paths[i] use mounts[i]."""
        return [cam for seq, mounts in zip(self.paths, self.mounts) for cam in mount_cameras(seq, mounts)]


def default_strategies(
    model: OrchardModel,
    intrinsics: Intrinsics,
    sample_spacing: float = DEFAULT_SAMPLE_SPACING,
) -> dict[str, Strategy]:
    """The three data-collection strategies compared on one orchard.

    through_canopy: left and right cameras on passes at THROUGH_CANOPY_LEVELS of
                    the canopy band, each aimed at mid-canopy of the nearest row.
    over_canopy:    downward camera OVER_CANOPY_CLEARANCE above the canopy top.
    ground:         left-facing camera pitched up 30 degrees at GROUND_HEIGHT.
    All of them fly the same lawnmower passes.
    """
    layout = model.layout
    half_rows = (layout.rows - 1) / 2.0 * layout.row_spacing
    # One extra row spacing on both sides: the passes fall midway between rows and outside them.
    region = Aabb(
        np.array([model.bounds.min[0], -half_rows - layout.row_spacing, 0.0]),
        np.array([model.bounds.max[0], half_rows + layout.row_spacing, 0.0]),
    )
    bottom, top = canopy_band(model)
    mid_canopy = 0.5 * (bottom + top)

    def passes(height: float) -> PoseSequence:
        return lawnmower_path(region, layout.row_spacing, height, sample_spacing)

    side = (MountConfig(MountKind.SIDE_LEFT, intrinsics), MountConfig(MountKind.SIDE_RIGHT, intrinsics))
    through_heights = [bottom + level * (top - bottom) for level in THROUGH_CANOPY_LEVELS]
    through_mounts = tuple(
        aim_side_mounts(side, side_aim_pitch(h, mid_canopy, layout.row_spacing / 2.0)) for h in through_heights
    )
    return {
        "through_canopy": Strategy(
            "through_canopy", tuple(passes(h) for h in through_heights), through_mounts
        ),
        "over_canopy": Strategy(
            "over_canopy",
            (passes(top + OVER_CANOPY_CLEARANCE),),
            ((MountConfig(MountKind.DOWN, intrinsics),),),
        ),
        "ground": Strategy(
            "ground",
            (passes(GROUND_HEIGHT),),
            ((MountConfig(MountKind.UP_ANGLED, intrinsics, pitch_offset=UP_ANGLED_PITCH),),),
        ),
    }


MOUNT_SETS: dict[str, tuple[MountKind, ...]] = {
    "front": (MountKind.FRONT,),
    "dual_side": (MountKind.SIDE_LEFT, MountKind.SIDE_RIGHT),
    "side_left": (MountKind.SIDE_LEFT,),
    "down": (MountKind.DOWN,),
    "up_angled": (MountKind.UP_ANGLED,),
}


def named_mount_set(name: str, intrinsics: Intrinsics) -> MountSet:
    """A named camera arrangement; up_angled mounts get the default 30 degree pitch."""
    try:
        kinds = MOUNT_SETS[name]
    except KeyError:
        raise ValueError(f"unknown mount set {name!r}; known: {sorted(MOUNT_SETS)}") from None
    mounts = tuple(
        MountConfig(k, intrinsics, pitch_offset=UP_ANGLED_PITCH if k is MountKind.UP_ANGLED else 0.0)
        for k in kinds
    )
    return MountSet(name, mounts)
