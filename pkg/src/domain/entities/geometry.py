"""
Domain entities for scene geometry: vectors, rays, triangles, boxes and frusta.
Vec3 values are float64 numpy arrays of shape (3,), world frame, z up, metres.
Batched triangle data lives in TriangleSoup so kernels can work on whole arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from src.domain.errors import GeometryError

Vec3 = NDArray[np.float64]

NO_FRUIT = -1
UNIT_TOLERANCE = 1e-9


def vec3(x: float, y: float, z: float) -> Vec3:
    """Build a finite Vec3."""
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"Vec3 components must be finite, got {v!r}")
    return v


def as_vec3(value: Sequence[float] | Vec3) -> Vec3:
    v = np.asarray(value, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"Vec3 components must be finite, got {v!r}")
    return v


class TriangleKind(IntEnum):
    TRUNK = 0
    BRANCH = 1
    LEAF = 2
    FRUIT = 3


OCCLUDER_KINDS = (TriangleKind.TRUNK, TriangleKind.BRANCH, TriangleKind.LEAF)


@dataclass(frozen=True, eq=False)
class Triangle:
    v0: Vec3
    v1: Vec3
    v2: Vec3
    kind: TriangleKind
    tree_id: int
    fruit_id: Optional[int] = None

    def __post_init__(self) -> None:
        for name in ("v0", "v1", "v2"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)))
        object.__setattr__(self, "kind", TriangleKind(self.kind))
        if self.tree_id < 0:
            raise GeometryError(f"tree_id must be >= 0, got {self.tree_id!r}")
        is_fruit = self.kind is TriangleKind.FRUIT
        if is_fruit != (self.fruit_id is not None):
            raise GeometryError(
                f"fruit_id must be present exactly for fruit triangles "
                f"(kind={self.kind.name}, fruit_id={self.fruit_id!r})"
            )
        if self.fruit_id is not None and self.fruit_id < 0:
            raise GeometryError(f"fruit_id must be >= 0, got {self.fruit_id!r}")

    @property
    def vertices(self) -> NDArray[np.float64]:
        return np.stack([self.v0, self.v1, self.v2])

    def area(self) -> float:
        return 0.5 * float(np.linalg.norm(np.cross(self.v1 - self.v0, self.v2 - self.v0)))


@dataclass(frozen=True, eq=False)
class Ray:
    origin: Vec3
    dir: Vec3

    def __post_init__(self) -> None:
        object.__setattr__(self, "origin", as_vec3(self.origin))
        object.__setattr__(self, "dir", as_vec3(self.dir))
        norm = float(np.linalg.norm(self.dir))
        if abs(norm - 1.0) > UNIT_TOLERANCE:
            raise GeometryError(f"Ray direction must be unit length, |dir|={norm!r}")

    @classmethod
    def towards(cls, origin: Vec3, target: Vec3) -> tuple["Ray", float]:
        """Ray from *origin* towards *target* plus the distance between them."""
        delta = as_vec3(target) - as_vec3(origin)
        dist = float(np.linalg.norm(delta))
        if dist == 0.0:
            raise GeometryError("Cannot build a ray towards the origin point itself")
        return cls(origin, delta / dist), dist

    def at(self, t: float) -> Vec3:
        return self.origin + t * self.dir


@dataclass(frozen=True, eq=False)
class Aabb:
    min: Vec3
    max: Vec3

    def __post_init__(self) -> None:
        lo = np.asarray(self.min, dtype=np.float64).reshape(3)
        hi = np.asarray(self.max, dtype=np.float64).reshape(3)
        if np.any(lo > hi):
            raise GeometryError(f"Aabb min must be <= max componentwise: {lo!r} > {hi!r}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @classmethod
    def from_points(cls, points: NDArray[np.float64]) -> "Aabb":
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        if pts.shape[0] == 0:
            raise GeometryError("Aabb.from_points requires at least one point")
        return cls(pts.min(axis=0), pts.max(axis=0))

    @property
    def extent(self) -> Vec3:
        return self.max - self.min

    @property
    def center(self) -> Vec3:
        return 0.5 * (self.min + self.max)

    def contains(self, p: Vec3, tol: float = 0.0) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return bool(np.all(p >= self.min - tol) and np.all(p <= self.max + tol))

    def inflate(self, margin: float) -> "Aabb":
        return Aabb(self.min - margin, self.max + margin)

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(np.minimum(self.min, other.min), np.maximum(self.max, other.max))

    def equals(self, other: "Aabb") -> bool:
        return np.array_equal(self.min, other.min) and np.array_equal(self.max, other.max)


@dataclass(frozen=True, eq=False)
class TriangleSoup:
    """Array-backed list of Triangle.

    vertices:  (N, 3, 3) float64; vertex k of triangle i is vertices[i, k].
    kinds:     (N,) uint8 TriangleKind values.
    tree_ids:  (N,) int32.
    fruit_ids: (N,) int32, NO_FRUIT for non-fruit triangles.
    """

    vertices: NDArray[np.float64]
    kinds: NDArray[np.uint8]
    tree_ids: NDArray[np.int32]
    fruit_ids: NDArray[np.int32]

    def __post_init__(self) -> None:
        vertices = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3, 3)
        n = vertices.shape[0]
        kinds = np.ascontiguousarray(self.kinds, dtype=np.uint8).reshape(n)
        tree_ids = np.ascontiguousarray(self.tree_ids, dtype=np.int32).reshape(n)
        fruit_ids = np.ascontiguousarray(self.fruit_ids, dtype=np.int32).reshape(n)
        if not np.all(np.isfinite(vertices)):
            raise GeometryError("Triangle vertices must be finite")
        is_fruit = kinds == TriangleKind.FRUIT
        if np.any(is_fruit != (fruit_ids >= 0)):
            raise GeometryError("fruit_ids must be set exactly for fruit triangles")
        for name, arr in (
            ("vertices", vertices),
            ("kinds", kinds),
            ("tree_ids", tree_ids),
            ("fruit_ids", fruit_ids),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls) -> "TriangleSoup":
        return cls(
            np.zeros((0, 3, 3)),
            np.zeros(0, np.uint8),
            np.zeros(0, np.int32),
            np.zeros(0, np.int32),
        )

    @classmethod
    def from_triangles(cls, triangles: Iterable[Triangle]) -> "TriangleSoup":
        tris = list(triangles)
        if not tris:
            return cls.empty()
        return cls(
            np.stack([t.vertices for t in tris]),
            np.array([int(t.kind) for t in tris], dtype=np.uint8),
            np.array([t.tree_id for t in tris], dtype=np.int32),
            np.array([NO_FRUIT if t.fruit_id is None else t.fruit_id for t in tris], dtype=np.int32),
        )

    @classmethod
    def concat(cls, parts: Sequence["TriangleSoup"]) -> "TriangleSoup":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.vertices for p in parts]),
            np.concatenate([p.kinds for p in parts]),
            np.concatenate([p.tree_ids for p in parts]),
            np.concatenate([p.fruit_ids for p in parts]),
        )

    def __len__(self) -> int:
        return int(self.vertices.shape[0])

    def __getitem__(self, index: int) -> Triangle:
        fruit_id = int(self.fruit_ids[index])
        return Triangle(
            self.vertices[index, 0].copy(),
            self.vertices[index, 1].copy(),
            self.vertices[index, 2].copy(),
            TriangleKind(int(self.kinds[index])),
            int(self.tree_ids[index]),
            None if fruit_id == NO_FRUIT else fruit_id,
        )

    def __iter__(self) -> Iterator[Triangle]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, mask_or_index: NDArray) -> "TriangleSoup":
        return TriangleSoup(
            self.vertices[mask_or_index],
            self.kinds[mask_or_index],
            self.tree_ids[mask_or_index],
            self.fruit_ids[mask_or_index],
        )

    def areas(self) -> NDArray[np.float64]:
        e1 = self.vertices[:, 1] - self.vertices[:, 0]
        e2 = self.vertices[:, 2] - self.vertices[:, 0]
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)

    def kind_mask(self, kinds: Iterable[TriangleKind]) -> NDArray[np.bool_]:
        return np.isin(self.kinds, np.array([int(k) for k in kinds], dtype=np.uint8))

    def bounds(self) -> Optional[Aabb]:
        if len(self) == 0:
            return None
        return Aabb.from_points(self.vertices.reshape(-1, 3))

    def equals(self, other: "TriangleSoup") -> bool:
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.kinds, other.kinds)
            and np.array_equal(self.tree_ids, other.tree_ids)
            and np.array_equal(self.fruit_ids, other.fruit_ids)
        )


@dataclass(frozen=True, eq=False)
class Frustum:
    """Camera viewing volume: +x of *orientation* is the view axis."""

    apex: Vec3
    orientation: Rotation
    hfov: float
    vfov: float
    far: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "apex", as_vec3(self.apex))
        if not (0.0 < self.hfov < np.pi and 0.0 < self.vfov < np.pi):
            raise GeometryError(f"fov must lie in (0, pi): hfov={self.hfov!r}, vfov={self.vfov!r}")
        if not self.far > 0.0:
            raise GeometryError(f"far must be > 0, got {self.far!r}")

    @property
    def axis(self) -> Vec3:
        return self.orientation.apply(np.array([1.0, 0.0, 0.0]))
