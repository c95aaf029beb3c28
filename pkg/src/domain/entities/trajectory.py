"""
Domain entities for global data-collection trajectories and parameter sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray


class MountKind(str, Enum):
    FRONT = "front"
    SIDE_LEFT = "side_left"
    SIDE_RIGHT = "side_right"
    DOWN = "down"
    UP_ANGLED = "up_angled"


class PathPattern(str, Enum):
    LAWNMOWER = "lawnmower"
    STRAIGHT_ROWS = "straight_rows"


@dataclass(frozen=True)
class Intrinsics:
    hfov: float
    vfov: float
    far: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (0 < self.hfov < math.pi and 0 < self.vfov < math.pi):
            raise ValueError(f"fov must lie in (0, pi): {self.hfov!r}, {self.vfov!r}")
        if not self.far > 0:
            raise ValueError(f"far must be > 0, got {self.far!r}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"resolution must be positive, got {self.width!r}x{self.height!r}")


@dataclass(frozen=True)
class MountConfig:
    mount: MountKind
    intrinsics: Intrinsics
    pitch_offset: float = 0.0
    yaw_offset: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mount", MountKind(self.mount))
        for name in ("pitch_offset", "yaw_offset"):
            value = getattr(self, name)
            if not -math.pi <= value <= math.pi:
                raise ValueError(f"{name} must lie in [-pi, pi], got {value!r}")


@dataclass(frozen=True, eq=False)
class PoseSequence:
    """Ordered vehicle poses: positions (N, 3), headings (N,) yaw radians, times (N,) s."""

    positions: NDArray[np.float64]
    headings: NDArray[np.float64]
    times: NDArray[np.float64]
    sample_spacing: float

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        headings = np.asarray(self.headings, dtype=np.float64).reshape(-1)
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        n = positions.shape[0]
        if headings.shape[0] != n or times.shape[0] != n:
            raise ValueError("positions, headings and times must have equal length")
        if n > 1:
            if np.any(np.diff(times) <= 0):
                raise ValueError("PoseSequence times must be strictly increasing")
            gaps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
            if np.any(gaps > 2.0 * self.sample_spacing + 1e-9):
                raise ValueError(
                    f"consecutive samples exceed 2x sample_spacing ({gaps.max():.3f} m)"
                )
        for name, arr in (("positions", positions), ("headings", headings), ("times", times)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.positions.shape[0])

    def length(self) -> float:
        if len(self) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.positions, axis=0), axis=1).sum())


@dataclass(frozen=True)
class MountSet:
    name: str
    mounts: tuple[MountConfig, ...]


@dataclass(frozen=True)
class SweepSpec:
    heights: tuple[float, ...]
    mount_sets: tuple[MountSet, ...]
    seeds: tuple[int, ...]
    pattern: PathPattern = PathPattern.STRAIGHT_ROWS
    sample_spacing: float = 0.5

    def __post_init__(self) -> None:
        if not self.heights or not self.mount_sets or not self.seeds:
            raise ValueError("SweepSpec heights, mount_sets and seeds must be non-empty")
        object.__setattr__(self, "pattern", PathPattern(self.pattern))


@dataclass(frozen=True)
class SweepRow:
    height: float
    mounts: str
    seed: int
    n_visible: int
    total_fruits: int

    @property
    def fraction(self) -> float:
        return self.n_visible / self.total_fruits if self.total_fruits else 0.0


@dataclass(frozen=True)
class SweepCell:
    height: float
    mounts: str
    mean_fraction: float
    std_fraction: float
    n_seeds: int


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]
    cells: tuple[SweepCell, ...]

    def best_height(self, mounts: str) -> float:
        cells = [c for c in self.cells if c.mounts == mounts]
        return max(cells, key=lambda c: c.mean_fraction).height

    def has_interior_maximum(self, mounts: str) -> bool:
        heights = sorted({c.height for c in self.cells if c.mounts == mounts})
        return heights[0] < self.best_height(mounts) < heights[-1]
