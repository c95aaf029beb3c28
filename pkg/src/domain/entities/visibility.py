"""
Domain entities for occlusion-aware visibility results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.orchard import FruitKey


@dataclass(frozen=True)
class Observation:
    tree_id: int
    fruit_id: int
    camera_index: int

    @property
    def key(self) -> FruitKey:
        return (self.tree_id, self.fruit_id)


@dataclass(frozen=True, eq=False)
class VisibilityReport:
    """Multiset V of observations plus its deduplicated summary.

    visible_keys are sorted; visible_fruit_positions[i] is the centre of
    visible_keys[i].
    """

    observations: tuple[Observation, ...]
    visible_keys: tuple[FruitKey, ...]
    visible_fruit_positions: NDArray[np.float64]
    total_fruits: int
    per_tree_visible: dict[int, int] = field(default_factory=dict)
    per_tree_total: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.visible_keys) > self.total_fruits:
            raise ValueError(
                f"n_visible ({len(self.visible_keys)}) exceeds total_fruits ({self.total_fruits})"
            )

    @property
    def n_visible(self) -> int:
        return len(self.visible_keys)

    @property
    def fraction_visible(self) -> float:
        return self.n_visible / self.total_fruits if self.total_fruits else 0.0

    def observations_for_camera(self, camera_index: int) -> list[Observation]:
        return [o for o in self.observations if o.camera_index == camera_index]


@dataclass(frozen=True, eq=False)
class VisibilityHeatmap:
    """3-D histogram of visible fruit centres on a grid anchored at multiples of bin_size.

    Bin (i, j, k) spans origin + bin_size * [i, i+1) x [j, j+1) x [k, k+1).
    """

    origin: NDArray[np.float64]
    bin_size: float
    counts: NDArray[np.int64]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def origin_index(self) -> NDArray[np.int64]:
        return np.rint(self.origin / self.bin_size).astype(np.int64)


@dataclass(frozen=True)
class HeightLayer:
    z_min: float
    z_max: float
    visible: int
    total: int
