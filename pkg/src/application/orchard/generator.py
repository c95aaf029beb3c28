"""
Deterministic procedural tree and orchard generation.

A deliberately small recursive model: a cylindrical trunk, branching_levels - 1
levels of tapering cylindrical branches, leaf quads scattered around the
terminal nodes and icosphere fruits hung below terminal nodes, never closer than
2.5 fruit radii centre to centre. The first branch
level has length canopy_radius * (1 - r) / (1 - r^(levels - 1)), so the chain of
branch lengths sums to canopy_radius.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from src.application.orchard.rng import derive_seed, substream
from src.domain.entities.geometry import NO_FRUIT, Aabb, TriangleKind, TriangleSoup, Vec3, as_vec3
from src.domain.entities.orchard import FruitRecord, OrchardLayout, OrchardModel, TreeParams
from src.domain.errors import GeometryError

logger = logging.getLogger(__name__)

MIN_BRANCH_RADIUS = 0.004
TRUNK_TOP_TAPER = 0.8
CHILD_RADIUS_RATIO = 0.6
# Azimuth spread (radians) of a child branch around its parent's heading.
CHILD_AZIMUTH_SPREAD = 0.6
# Fruit centres stay at least 2 * fruit_radius * (1 + margin) apart.
FRUIT_SPACING_MARGIN = 0.25
FRUIT_SPREAD_GROWTH = 1.02
MAX_FRUIT_ATTEMPTS = 400

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
_ICOSAHEDRON_VERTICES = np.array(
    [
        (-1, _GOLDEN, 0), (1, _GOLDEN, 0), (-1, -_GOLDEN, 0), (1, -_GOLDEN, 0),
        (0, -1, _GOLDEN), (0, 1, _GOLDEN), (0, -1, -_GOLDEN), (0, 1, -_GOLDEN),
        (_GOLDEN, 0, -1), (_GOLDEN, 0, 1), (-_GOLDEN, 0, -1), (-_GOLDEN, 0, 1),
    ],
    dtype=np.float64,
)
_ICOSAHEDRON_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
)


@lru_cache(maxsize=4)
def unit_icosphere(subdivisions: int) -> NDArray[np.float64]:
    """Triangles (F, 3, 3) of a unit icosphere; 20 * 4**subdivisions faces."""
    verts = _ICOSAHEDRON_VERTICES / np.linalg.norm(_ICOSAHEDRON_VERTICES, axis=1, keepdims=True)
    tris = verts[_ICOSAHEDRON_FACES]
    for _ in range(subdivisions):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = (_normalize(a + b), _normalize(b + c), _normalize(c + a))
        tris = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
                np.stack([ab, bc, ca], axis=1),
            ]
        )
    tris.setflags(write=False)
    return tris


def _normalize(v: NDArray[np.float64]) -> NDArray[np.float64]:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _perpendicular_basis(axis: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    """Two unit vectors orthogonal to each unit *axis* row (and to each other)."""
    axis = np.atleast_2d(axis)
    helper = np.where(
        (np.abs(axis[:, 0]) < 0.9)[:, None],
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
    )
    e1 = _normalize(np.cross(axis, helper))
    e2 = np.cross(axis, e1)
    return e1, e2


def cylinder_triangles(p0: Vec3, p1: Vec3, r0: float, r1: float, segments: int) -> NDArray[np.float64]:
    """Open tapered cylinder side from p0 (radius r0) to p1 (radius r1), shape (2*segments, 3, 3)."""
    axis = p1 - p0
    axis = axis / np.linalg.norm(axis)
    e1, e2 = _perpendicular_basis(axis)
    theta = 2.0 * np.pi * np.arange(segments + 1) / segments
    ring = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    ring0 = p0 + r0 * ring
    ring1 = p1 + r1 * ring
    lower = np.stack([ring0[:-1], ring0[1:], ring1[:-1]], axis=1)
    upper = np.stack([ring0[1:], ring1[1:], ring1[:-1]], axis=1)
    return np.concatenate([lower, upper])


def leaf_triangles(
    centers: NDArray[np.float64],
    normals: NDArray[np.float64],
    spins: NDArray[np.float64],
    size: float,
) -> NDArray[np.float64]:
    """Square leaves of side *size* as two triangles each, shape (2N, 3, 3)."""
    if centers.shape[0] == 0:
        return np.zeros((0, 3, 3))
    b1, b2 = _perpendicular_basis(normals)
    cos, sin = np.cos(spins)[:, None], np.sin(spins)[:, None]
    e1 = (cos * b1 + sin * b2) * (size / 2.0)
    e2 = (-sin * b1 + cos * b2) * (size / 2.0)
    c00, c10 = centers - e1 - e2, centers + e1 - e2
    c11, c01 = centers + e1 + e2, centers - e1 + e2
    first = np.stack([c00, c10, c11], axis=1)
    second = np.stack([c00, c11, c01], axis=1)
    return np.stack([first, second], axis=1).reshape(-1, 3, 3)


def _ball(rng: np.random.Generator, n: int, radius: float) -> NDArray[np.float64]:
    dirs = _normalize(rng.normal(size=(n, 3))) if n else np.zeros((0, 3))
    return dirs * (radius * rng.random(n) ** (1.0 / 3.0))[:, None]


def _place_fruits(
    rng: np.random.Generator,
    anchors: NDArray[np.float64],
    probs: NDArray[np.float64],
    n: int,
    spread: float,
    min_gap: float,
) -> NDArray[np.float64]:
    """Draw *n* centres around weighted anchors, at least *min_gap* apart.

    A rejected draw is resampled from a ball grown by FRUIT_SPREAD_GROWTH.
    """
    centers = np.zeros((n, 3))
    for i in range(n):
        radius = spread
        for _ in range(MAX_FRUIT_ATTEMPTS):
            c = anchors[rng.choice(anchors.shape[0], p=probs)] + _ball(rng, 1, radius)[0]
            if i == 0 or np.linalg.norm(centers[:i] - c, axis=1).min() >= min_gap:
                break
            radius *= FRUIT_SPREAD_GROWTH
        else:
            raise GeometryError(f"could not place fruit {i} of {n} at spacing {min_gap:.4f} m")
        centers[i] = c
    return centers


def generate_tree(
    params: TreeParams,
    tree_id: int,
    base: Vec3,
    seed: int,
) -> tuple[TriangleSoup, list[FruitRecord]]:
    """Generate one tree rooted at *base*; a pure function of (params, tree_id, base, seed)."""
    rng = substream(seed, "tree")
    base = as_vec3(base)
    parts: list[tuple[NDArray[np.float64], TriangleKind, NDArray[np.int32]]] = []

    def add(tris: NDArray[np.float64], kind: TriangleKind, fruit_ids: Optional[NDArray] = None) -> None:
        if fruit_ids is None:
            fruit_ids = np.full(tris.shape[0], NO_FRUIT, dtype=np.int32)
        parts.append((tris, kind, fruit_ids))

    trunk_top = base + np.array([0.0, 0.0, params.trunk_height])
    top_radius = max(params.trunk_radius * TRUNK_TOP_TAPER, MIN_BRANCH_RADIUS)
    add(
        cylinder_triangles(base, trunk_top, params.trunk_radius, top_radius, params.cylinder_segments),
        TriangleKind.TRUNK,
    )

    nodes: list[tuple[Vec3, float, float]] = [(trunk_top, float(rng.uniform(0.0, 2 * np.pi)), top_radius)]
    branch_levels = params.branching_levels - 1
    terminal_length = params.leaf_size
    if branch_levels > 0:
        ratio = params.branch_length_ratio
        first_length = params.canopy_radius * (1.0 - ratio) / (1.0 - ratio**branch_levels)
        lo, hi = params.branches_per_node
        pitch_lo, pitch_hi = params.branch_pitch
        for level in range(branch_levels):
            length = first_length * ratio**level
            children: list[tuple[Vec3, float, float]] = []
            for position, azimuth, radius in nodes:
                k = int(rng.integers(lo, hi + 1))
                offset = float(rng.uniform(0.0, 2 * np.pi))
                child_radius = max(radius * CHILD_RADIUS_RATIO, MIN_BRANCH_RADIUS)
                for i in range(k):
                    if level == 0:
                        a = offset + 2 * np.pi * i / k
                    else:
                        a = azimuth + float(rng.uniform(-CHILD_AZIMUTH_SPREAD, CHILD_AZIMUTH_SPREAD))
                    pitch = float(rng.uniform(pitch_lo, pitch_hi))
                    direction = np.array(
                        [math.cos(pitch) * math.cos(a), math.cos(pitch) * math.sin(a), math.sin(pitch)]
                    )
                    end = position + length * direction
                    add(
                        cylinder_triangles(position, end, radius, child_radius, params.cylinder_segments),
                        TriangleKind.BRANCH,
                    )
                    children.append((end, a, child_radius))
            nodes = children
        terminal_length = length

    terminals = np.array([n[0] for n in nodes])

    leaf_lo, leaf_hi = params.leaf_count_per_terminal
    per_terminal = rng.integers(leaf_lo, leaf_hi + 1, size=terminals.shape[0])
    n_leaves = int(per_terminal.sum())
    leaf_centers = np.repeat(terminals, per_terminal, axis=0) + _ball(rng, n_leaves, terminal_length)
    normals = _normalize(rng.normal(size=(n_leaves, 3))) if n_leaves else np.zeros((0, 3))
    spins = rng.uniform(0.0, np.pi, size=n_leaves)
    add(leaf_triangles(leaf_centers, normals, spins, params.leaf_size), TriangleKind.LEAF)

    fruit_lo, fruit_hi = params.fruit_count
    n_fruits = int(rng.integers(fruit_lo, fruit_hi + 1))
    z = terminals[:, 2]
    mid = z.min() + params.fruit_height_peak * (z.max() - z.min())
    half = max(0.5 * (z.max() - z.min()), 1e-6)
    weights = np.exp(-params.fruit_interior_bias * ((z - mid) / half) ** 2)
    hang = np.array([0.0, 0.0, params.fruit_radius])
    centers = _place_fruits(
        rng,
        terminals - hang,
        weights / weights.sum(),
        n_fruits,
        0.5 * terminal_length,
        2.0 * params.fruit_radius * (1.0 + FRUIT_SPACING_MARGIN),
    )

    sphere = unit_icosphere(params.fruit_subdivisions)
    fruits: list[FruitRecord] = []
    for fruit_id, center in enumerate(centers):
        add(
            center + params.fruit_radius * sphere,
            TriangleKind.FRUIT,
            np.full(sphere.shape[0], fruit_id, dtype=np.int32),
        )
        fruits.append(FruitRecord(tree_id, fruit_id, center, params.fruit_radius))

    vertices = np.concatenate([p[0] for p in parts])
    kinds = np.concatenate([np.full(p[0].shape[0], int(p[1]), dtype=np.uint8) for p in parts])
    fruit_ids = np.concatenate([p[2] for p in parts])
    soup = TriangleSoup(vertices, kinds, np.full(vertices.shape[0], tree_id, dtype=np.int32), fruit_ids)
    return soup, fruits


def tree_bases(layout: OrchardLayout, seed: int) -> NDArray[np.float64]:
    """Grid positions (row-major tree index), centred on the origin, with uniform xy jitter."""
    rng = substream(seed, "jitter")
    bases = np.zeros((layout.tree_count, 3))
    for r in range(layout.rows):
        for c in range(layout.cols):
            i = r * layout.cols + c
            bases[i, 0] = (c - (layout.cols - 1) / 2.0) * layout.tree_spacing
            bases[i, 1] = (r - (layout.rows - 1) / 2.0) * layout.row_spacing
    if layout.position_jitter > 0:
        bases[:, :2] += rng.uniform(-layout.position_jitter, layout.position_jitter, size=(layout.tree_count, 2))
    return bases


def generate_orchard(
    params: TreeParams,
    layout: OrchardLayout,
    seed: int,
    max_workers: int = 1,
) -> OrchardModel:
    """rows x cols trees; tree i uses the per-tree seed derive_seed(seed, "tree", i)."""
    bases = tree_bases(layout, seed)
    jobs = [(params, i, bases[i], derive_seed(seed, "tree", i)) for i in range(layout.tree_count)]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda job: generate_tree(*job), jobs))
    else:
        results = [generate_tree(*job) for job in jobs]

    triangles = TriangleSoup.concat([soup for soup, _ in results])
    fruits = tuple(f for _, tree_fruits in results for f in tree_fruits)
    bounds = Aabb.from_points(triangles.vertices.reshape(-1, 3))
    logger.info(
        "orchard generated trees=%d triangles=%d fruits=%d seed=%d",
        layout.tree_count,
        len(triangles),
        len(fruits),
        seed,
    )
    return OrchardModel(params, layout, seed, triangles, fruits, bounds, bases)
