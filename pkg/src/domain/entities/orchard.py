"""
Domain entities for procedurally generated orchards.
TreeParams/OrchardLayout are the generator inputs; OrchardModel is the immutable
simulated world consumed by visibility analysis, rendering and counting.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from functools import cached_property
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.geometry import Aabb, TriangleSoup, Vec3, as_vec3

IntRange = tuple[int, int]
FloatRange = tuple[float, float]
FruitKey = tuple[int, int]


def _check_range(name: str, value: tuple, minimum: float) -> None:
    lo, hi = value
    if lo > hi:
        raise ValueError(f"{name} range is empty: {value!r}")
    if lo < minimum:
        raise ValueError(f"{name} lower bound must be >= {minimum}, got {value!r}")


@dataclass(frozen=True)
class TreeParams:
    """Parameters of the recursive tree generator.

    branching_levels counts the trunk as the first level, so 1 means trunk only.
    fruit_interior_bias shapes fruit heights: 0 attaches fruits uniformly over
    terminal nodes, larger values favour nodes near fruit_height_peak, the
    fraction of the terminal height range (0 lowest, 1 highest) where fruit is densest.
    """

    trunk_height: float
    trunk_radius: float
    branching_levels: int
    branches_per_node: IntRange
    branch_length_ratio: float
    branch_pitch: FloatRange
    leaf_count_per_terminal: IntRange
    leaf_size: float
    fruit_count: IntRange
    fruit_radius: float
    canopy_radius: float
    fruit_interior_bias: float = 1.0
    fruit_height_peak: float = 0.5
    cylinder_segments: int = 6
    fruit_subdivisions: int = 0

    def __post_init__(self) -> None:
        for name in ("branches_per_node", "leaf_count_per_terminal", "fruit_count"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        object.__setattr__(self, "branch_pitch", tuple(float(v) for v in self.branch_pitch))
        for name in ("trunk_height", "trunk_radius", "leaf_size", "fruit_radius", "canopy_radius"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0, got {value!r}")
        if self.branching_levels < 1:
            raise ValueError(f"branching_levels must be >= 1, got {self.branching_levels!r}")
        if not 0.0 < self.branch_length_ratio < 1.0:
            raise ValueError(f"branch_length_ratio must lie in (0, 1), got {self.branch_length_ratio!r}")
        _check_range("branches_per_node", self.branches_per_node, 1)
        _check_range("leaf_count_per_terminal", self.leaf_count_per_terminal, 0)
        _check_range("fruit_count", self.fruit_count, 0)
        _check_range("branch_pitch", self.branch_pitch, -math.pi / 2)
        if self.branch_pitch[1] > math.pi / 2:
            raise ValueError(f"branch_pitch must lie within [-pi/2, pi/2], got {self.branch_pitch!r}")
        if self.fruit_interior_bias < 0:
            raise ValueError(f"fruit_interior_bias must be >= 0, got {self.fruit_interior_bias!r}")
        if not 0.0 <= self.fruit_height_peak <= 1.0:
            raise ValueError(f"fruit_height_peak must lie in [0, 1], got {self.fruit_height_peak!r}")
        if self.cylinder_segments < 3:
            raise ValueError(f"cylinder_segments must be >= 3, got {self.cylinder_segments!r}")
        if not 0 <= self.fruit_subdivisions <= 3:
            raise ValueError(f"fruit_subdivisions must lie in [0, 3], got {self.fruit_subdivisions!r}")

    def to_dict(self) -> dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TreeParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown TreeParams fields: {sorted(unknown)!r}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})


@dataclass(frozen=True)
class OrchardLayout:
    rows: int
    cols: int
    row_spacing: float
    tree_spacing: float
    position_jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"rows and cols must be >= 1, got {self.rows!r}x{self.cols!r}")
        if not (self.row_spacing > 0 and self.tree_spacing > 0):
            raise ValueError(
                f"spacings must be > 0, got row={self.row_spacing!r}, tree={self.tree_spacing!r}"
            )
        if not 0 <= self.position_jitter < min(self.row_spacing, self.tree_spacing) / 2:
            raise ValueError(
                f"position_jitter must lie in [0, min(spacings)/2), got {self.position_jitter!r}"
            )

    @property
    def tree_count(self) -> int:
        return self.rows * self.cols

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "OrchardLayout":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown OrchardLayout fields: {sorted(unknown)!r}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class FruitRecord:
    tree_id: int
    fruit_id: int
    center: Vec3
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_vec3(self.center))
        if not self.radius > 0:
            raise ValueError(f"fruit radius must be > 0, got {self.radius!r}")

    @property
    def key(self) -> FruitKey:
        return (self.tree_id, self.fruit_id)


@dataclass(frozen=True, eq=False)
class OrchardModel:
    params: TreeParams
    layout: OrchardLayout
    seed: int
    triangles: TriangleSoup
    fruits: tuple[FruitRecord, ...]
    bounds: Aabb
    tree_bases: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fruits", tuple(self.fruits))
        keys = [f.key for f in self.fruits]
        if len(set(keys)) != len(keys):
            raise ValueError("(tree_id, fruit_id) pairs must be unique within an orchard")
        bases = np.asarray(self.tree_bases, dtype=np.float64).reshape(-1, 3)
        bases.setflags(write=False)
        object.__setattr__(self, "tree_bases", bases)

    @property
    def total_fruits(self) -> int:
        return len(self.fruits)

    @cached_property
    def fruit_centers(self) -> NDArray[np.float64]:
        if not self.fruits:
            return np.zeros((0, 3))
        centers = np.stack([f.center for f in self.fruits])
        centers.setflags(write=False)
        return centers

    @cached_property
    def fruit_radii(self) -> NDArray[np.float64]:
        return np.array([f.radius for f in self.fruits], dtype=np.float64)

    @cached_property
    def fruit_keys(self) -> tuple[FruitKey, ...]:
        return tuple(f.key for f in self.fruits)

    @cached_property
    def fruit_index(self) -> dict[FruitKey, int]:
        return {key: i for i, key in enumerate(self.fruit_keys)}

    def fruit(self, key: FruitKey) -> Optional[FruitRecord]:
        index = self.fruit_index.get(key)
        return None if index is None else self.fruits[index]

    def fruits_per_tree(self) -> dict[int, int]:
        counts = {tree_id: 0 for tree_id in range(self.tree_bases.shape[0])}
        for f in self.fruits:
            counts[f.tree_id] = counts.get(f.tree_id, 0) + 1
        return counts

    def equals(self, other: "OrchardModel") -> bool:
        return (
            self.params == other.params
            and self.layout == other.layout
            and self.seed == other.seed
            and self.triangles.equals(other.triangles)
            and self.bounds.equals(other.bounds)
            and np.array_equal(self.tree_bases, other.tree_bases)
            and len(self.fruits) == len(other.fruits)
            and all(
                a.key == b.key and np.array_equal(a.center, b.center) and a.radius == b.radius
                for a, b in zip(self.fruits, other.fruits)
            )
        )
