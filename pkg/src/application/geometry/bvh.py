"""
Bounding volume hierarchy over a TriangleSoup.

Construction: median split on the longest axis of the centroid bounds, leaves of
at most LEAF_SIZE triangles, nodes stored in flat arrays. Queries are batched: a
frontier of (ray, node) pairs is advanced one tree level per iteration, so the
Python loop runs O(depth) times while the per-pair work is vectorised.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from src.application.geometry.intersect import moller_trumbore, point_triangle_distances
from src.domain.entities.geometry import Ray, Triangle, TriangleSoup

logger = logging.getLogger(__name__)

LEAF_SIZE = 4
# Node boxes are padded so slab-test rounding never prunes a ray the kernel would hit.
BOX_PAD = 1e-7
RAY_CHUNK = 4096
# Bounds the (point, node) frontier of min_distance.
POINT_CHUNK = 64

TriangleFilter = Union[Callable[[Triangle], bool], NDArray[np.bool_], None]


@dataclass(frozen=True, eq=False)
class Bvh:
    """Flat BVH. A node is a leaf iff count > 0; leaves reference
    triangle_indices[start:start + count]. Internal nodes store left/right."""

    node_min: NDArray[np.float64]
    node_max: NDArray[np.float64]
    left: NDArray[np.int64]
    right: NDArray[np.int64]
    start: NDArray[np.int64]
    count: NDArray[np.int64]
    triangle_indices: NDArray[np.int64]
    triangles: TriangleSoup

    def __post_init__(self) -> None:
        for name in ("node_min", "node_max", "left", "right", "start", "count", "triangle_indices"):
            getattr(self, name).setflags(write=False)
        perm = self.triangles.vertices[self.triangle_indices]
        for k, name in enumerate(("_v0", "_v1", "_v2")):
            arr = np.ascontiguousarray(perm[:, k])
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def is_empty(self) -> bool:
        return self.node_min.shape[0] == 0

    @property
    def node_count(self) -> int:
        return int(self.node_min.shape[0])

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def any_hit(
        self,
        origins: NDArray[np.float64],
        dirs: NDArray[np.float64],
        t_max: NDArray[np.float64] | float,
        mask: Optional[NDArray[np.bool_]] = None,
    ) -> NDArray[np.bool_]:
        """For each ray: does any triangle (passing *mask*) intersect it in (EPS_RAY, t_max)?"""
        origins, dirs, t_max = _prepare(origins, dirs, t_max)
        hit = np.zeros(origins.shape[0], dtype=bool)
        if self.is_empty or origins.shape[0] == 0:
            return hit
        slot_mask = self._slot_mask(mask)
        for lo in range(0, origins.shape[0], RAY_CHUNK):
            sl = slice(lo, lo + RAY_CHUNK)
            hit[sl] = self._any_hit_chunk(origins[sl], dirs[sl], t_max[sl], slot_mask)
        return hit

    def nearest_hit(
        self,
        origins: NDArray[np.float64],
        dirs: NDArray[np.float64],
        t_max: NDArray[np.float64] | float,
        mask: Optional[NDArray[np.bool_]] = None,
    ) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
        """Nearest hit parameter per ray (np.inf if none below t_max) and the triangle index (-1)."""
        origins, dirs, t_max = _prepare(origins, dirs, t_max)
        n = origins.shape[0]
        best_t = np.full(n, np.inf)
        best_tri = np.full(n, -1, dtype=np.int64)
        if self.is_empty or n == 0:
            return best_t, best_tri
        slot_mask = self._slot_mask(mask)
        for lo in range(0, n, RAY_CHUNK):
            sl = slice(lo, lo + RAY_CHUNK)
            best_t[sl], best_tri[sl] = self._nearest_chunk(origins[sl], dirs[sl], t_max[sl], slot_mask)
        return best_t, best_tri

    def min_distance(
        self,
        points: NDArray[np.float64],
        max_distance: float = np.inf,
        mask: Optional[NDArray[np.bool_]] = None,
    ) -> NDArray[np.float64]:
        """Exact distance from each point to the nearest triangle, capped at *max_distance*."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        best = np.full(pts.shape[0], float(max_distance))
        if self.is_empty or pts.shape[0] == 0:
            return best
        slot_mask = self._slot_mask(mask)
        for lo in range(0, pts.shape[0], POINT_CHUNK):
            sl = slice(lo, lo + POINT_CHUNK)
            best[sl] = self._min_distance_chunk(pts[sl], best[sl].copy(), slot_mask)
        return best

    # ------------------------------------------------------------------
    # Private helpers
    # ------------------------------------------------------------------

    def _slot_mask(self, mask: Optional[NDArray[np.bool_]]) -> Optional[NDArray[np.bool_]]:
        if mask is None:
            return None
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (len(self.triangles),):
            raise ValueError(f"triangle mask must have shape ({len(self.triangles)},), got {mask.shape!r}")
        return mask[self.triangle_indices]

    def _box_distance(self, node_ids: NDArray[np.int64], points: NDArray[np.float64]) -> NDArray[np.float64]:
        gap = np.maximum(np.maximum(self.node_min[node_ids] - points, points - self.node_max[node_ids]), 0.0)
        return np.linalg.norm(gap, axis=1)

    def _nearest_leaf(self, points: NDArray[np.float64]) -> NDArray[np.int64]:
        """Greedy root-to-leaf walk into the nearer child box, one leaf per point."""
        node_ids = np.zeros(points.shape[0], dtype=np.int64)
        inner = np.flatnonzero(self.count[node_ids] == 0)
        while inner.size:
            lc, rc = self.left[node_ids[inner]], self.right[node_ids[inner]]
            go_left = self._box_distance(lc, points[inner]) <= self._box_distance(rc, points[inner])
            node_ids[inner] = np.where(go_left, lc, rc)
            inner = inner[self.count[node_ids[inner]] == 0]
        return node_ids

    def _min_distance_chunk(self, pts, best, slot_mask) -> NDArray[np.float64]:
        # The greedy leaf gives every point a finite bound before the frontier expands.
        ids = np.arange(pts.shape[0])
        pp, slots = self._expand_leaves(ids, self._nearest_leaf(pts), slot_mask)
        if pp.size:
            d = point_triangle_distances(pts[pp], self._v0[slots], self._v1[slots], self._v2[slots])
            np.minimum.at(best, pp, d)
        point_ids = ids
        node_ids = np.zeros(pts.shape[0], dtype=np.int64)
        while point_ids.size:
            keep = self._box_distance(node_ids, pts[point_ids]) <= best[point_ids]
            point_ids, node_ids = point_ids[keep], node_ids[keep]
            leaf = self.count[node_ids] > 0
            pp, slots = self._expand_leaves(point_ids[leaf], node_ids[leaf], slot_mask)
            if pp.size:
                d = point_triangle_distances(pts[pp], self._v0[slots], self._v1[slots], self._v2[slots])
                np.minimum.at(best, pp, d)
            inner_points, inner_nodes = point_ids[~leaf], node_ids[~leaf]
            point_ids = np.concatenate([inner_points, inner_points])
            node_ids = np.concatenate([self.left[inner_nodes], self.right[inner_nodes]])
        return best

    def _slab(
        self,
        node_ids: NDArray[np.int64],
        origins: NDArray[np.float64],
        inv_dirs: NDArray[np.float64],
        t_max: NDArray[np.float64],
    ) -> NDArray[np.bool_]:
        with np.errstate(invalid="ignore"):
            t1 = (self.node_min[node_ids] - origins) * inv_dirs
            t2 = (self.node_max[node_ids] - origins) * inv_dirs
        t_near = np.fmax.reduce(np.fmin(t1, t2), axis=1)
        t_far = np.fmin.reduce(np.fmax(t1, t2), axis=1)
        return (t_near <= t_far) & (t_far >= 0.0) & (t_near <= t_max)

    def _expand_leaves(
        self,
        ids: NDArray[np.int64],
        leaf_nodes: NDArray[np.int64],
        slot_mask: Optional[NDArray[np.bool_]],
    ) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """(query, leaf) pairs → (query, triangle slot) pairs."""
        counts = self.count[leaf_nodes]
        total = int(counts.sum())
        if total == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        rep_ids = np.repeat(ids, counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        slots = np.repeat(self.start[leaf_nodes], counts) + offsets
        if slot_mask is not None:
            keep = slot_mask[slots]
            rep_ids, slots = rep_ids[keep], slots[keep]
        return rep_ids, slots

    def _any_hit_chunk(self, origins, dirs, t_max, slot_mask) -> NDArray[np.bool_]:
        hit = np.zeros(origins.shape[0], dtype=bool)
        with np.errstate(divide="ignore"):
            inv = 1.0 / dirs
        ray_ids = np.arange(origins.shape[0])
        node_ids = np.zeros(origins.shape[0], dtype=np.int64)
        while ray_ids.size:
            live = ~hit[ray_ids]
            ray_ids, node_ids = ray_ids[live], node_ids[live]
            keep = self._slab(node_ids, origins[ray_ids], inv[ray_ids], t_max[ray_ids])
            ray_ids, node_ids = ray_ids[keep], node_ids[keep]
            leaf = self.count[node_ids] > 0
            pr, slots = self._expand_leaves(ray_ids[leaf], node_ids[leaf], slot_mask)
            if pr.size:
                t = moller_trumbore(origins[pr], dirs[pr], self._v0[slots], self._v1[slots], self._v2[slots])
                hit[pr[t < t_max[pr]]] = True
            inner_rays, inner_nodes = ray_ids[~leaf], node_ids[~leaf]
            ray_ids = np.concatenate([inner_rays, inner_rays])
            node_ids = np.concatenate([self.left[inner_nodes], self.right[inner_nodes]])
        return hit

    def _nearest_chunk(self, origins, dirs, t_max, slot_mask):
        n = origins.shape[0]
        best_t = np.full(n, np.inf)
        best_tri = np.full(n, -1, dtype=np.int64)
        with np.errstate(divide="ignore"):
            inv = 1.0 / dirs
        ray_ids = np.arange(n)
        node_ids = np.zeros(n, dtype=np.int64)
        while ray_ids.size:
            bound = np.minimum(t_max[ray_ids], best_t[ray_ids])
            keep = self._slab(node_ids, origins[ray_ids], inv[ray_ids], bound)
            ray_ids, node_ids = ray_ids[keep], node_ids[keep]
            leaf = self.count[node_ids] > 0
            pr, slots = self._expand_leaves(ray_ids[leaf], node_ids[leaf], slot_mask)
            if pr.size:
                t = moller_trumbore(origins[pr], dirs[pr], self._v0[slots], self._v1[slots], self._v2[slots])
                ok = t < t_max[pr]
                pr, t, tri = pr[ok], t[ok], self.triangle_indices[slots[ok]]
                if pr.size:
                    # Per ray keep the smallest t, ties broken by the smallest triangle index.
                    order = np.lexsort((tri, t, pr))
                    pr, t, tri = pr[order], t[order], tri[order]
                    first = np.ones(pr.size, dtype=bool)
                    first[1:] = pr[1:] != pr[:-1]
                    pr, t, tri = pr[first], t[first], tri[first]
                    better = (t < best_t[pr]) | ((t == best_t[pr]) & (tri < best_tri[pr]))
                    best_t[pr[better]] = t[better]
                    best_tri[pr[better]] = tri[better]
            inner_rays, inner_nodes = ray_ids[~leaf], node_ids[~leaf]
            ray_ids = np.concatenate([inner_rays, inner_rays])
            node_ids = np.concatenate([self.left[inner_nodes], self.right[inner_nodes]])
        return best_t, best_tri


def _prepare(origins, dirs, t_max):
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
    if origins.shape[0] == 1 and dirs.shape[0] > 1:
        origins = np.broadcast_to(origins, dirs.shape)
    if origins.shape != dirs.shape:
        raise ValueError(f"origins {origins.shape!r} and dirs {dirs.shape!r} must match")
    t_max = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (origins.shape[0],))
    return origins, dirs, t_max


def build_bvh(triangles: TriangleSoup | Sequence[Triangle]) -> Bvh:
    """Build a BVH; deterministic for a fixed input order. Empty input gives an empty-scene BVH."""
    soup = triangles if isinstance(triangles, TriangleSoup) else TriangleSoup.from_triangles(triangles)
    n = len(soup)
    if n == 0:
        empty_i = np.zeros(0, dtype=np.int64)
        return Bvh(np.zeros((0, 3)), np.zeros((0, 3)), empty_i, empty_i, empty_i, empty_i, empty_i, soup)

    verts = soup.vertices
    tri_min = verts.min(axis=1)
    tri_max = verts.max(axis=1)
    centroids = verts.mean(axis=1)
    order = np.arange(n, dtype=np.int64)

    mins: list[NDArray] = []
    maxs: list[NDArray] = []
    left: list[int] = []
    right: list[int] = []
    start: list[int] = []
    count: list[int] = []

    def new_node(lo: int, hi: int) -> int:
        idx = order[lo:hi]
        mins.append(tri_min[idx].min(axis=0) - BOX_PAD)
        maxs.append(tri_max[idx].max(axis=0) + BOX_PAD)
        left.append(-1)
        right.append(-1)
        start.append(lo)
        count.append(0)
        return len(mins) - 1

    stack = [(new_node(0, n), 0, n)]
    while stack:
        node, lo, hi = stack.pop()
        if hi - lo <= LEAF_SIZE:
            count[node] = hi - lo
            continue
        idx = order[lo:hi]
        c = centroids[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        order[lo:hi] = idx[np.argsort(c[:, axis], kind="stable")]
        mid = lo + (hi - lo) // 2
        left[node] = new_node(lo, mid)
        right[node] = new_node(mid, hi)
        stack.append((right[node], mid, hi))
        stack.append((left[node], lo, mid))

    logger.debug("bvh built triangles=%d nodes=%d", n, len(mins))
    return Bvh(
        np.array(mins),
        np.array(maxs),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(start, dtype=np.int64),
        np.array(count, dtype=np.int64),
        order,
        soup,
    )


def resolve_filter(bvh: Bvh, filter: TriangleFilter) -> Optional[NDArray[np.bool_]]:
    """Turn a Triangle predicate (or a ready mask) into a boolean mask over bvh.triangles."""
    if filter is None:
        return None
    if callable(filter):
        return np.fromiter((bool(filter(t)) for t in bvh.triangles), dtype=bool, count=len(bvh.triangles))
    return np.asarray(filter, dtype=bool)


def bvh_any_hit(bvh: Bvh, ray: Ray, t_max: float, filter: TriangleFilter = None) -> bool:
    """True iff a triangle passing *filter* intersects *ray* in (EPS_RAY, t_max)."""
    mask = resolve_filter(bvh, filter)
    return bool(bvh.any_hit(ray.origin, ray.dir, t_max, mask)[0])


def bvh_nearest_hit(
    bvh: Bvh, ray: Ray, t_max: float, filter: TriangleFilter = None
) -> Optional[tuple[float, int]]:
    mask = resolve_filter(bvh, filter)
    t, tri = bvh.nearest_hit(ray.origin, ray.dir, t_max, mask)
    return None if tri[0] < 0 else (float(t[0]), int(tri[0]))
