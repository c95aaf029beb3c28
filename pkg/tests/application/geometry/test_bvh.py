import tracemalloc

import numpy as np
import pytest

from src.application.geometry.bvh import bvh_any_hit, bvh_nearest_hit, build_bvh
from src.application.geometry.intersect import moller_trumbore, point_triangle_distances
from src.application.orchard.generator import generate_orchard
from src.application.orchard.presets import get_preset
from src.domain.entities.geometry import Ray, TriangleKind, TriangleSoup, vec3
from src.domain.entities.orchard import OrchardLayout


def random_soup(rng: np.random.Generator, n: int) -> TriangleSoup:
    centers = rng.uniform(-5, 5, size=(n, 1, 3))
    verts = centers + rng.normal(scale=0.6, size=(n, 3, 3))
    kinds = rng.integers(0, 3, size=n)
    return TriangleSoup(verts, kinds, np.zeros(n), np.full(n, -1))


def random_rays(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    origins = rng.uniform(-8, 8, size=(n, 3))
    dirs = rng.normal(size=(n, 3))
    return origins, dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def linear_scan(soup: TriangleSoup, origins: np.ndarray, dirs: np.ndarray, t_max: float) -> np.ndarray:
    """t[ray, triangle] for every pair, np.inf beyond t_max."""
    n, m = origins.shape[0], len(soup)
    o = np.repeat(origins, m, axis=0)
    d = np.repeat(dirs, m, axis=0)
    v = np.tile(soup.vertices, (n, 1, 1))
    t = moller_trumbore(o, d, v[:, 0], v[:, 1], v[:, 2]).reshape(n, m)
    return np.where(t < t_max, t, np.inf)


@pytest.mark.parametrize("n_triangles", [1, 3, 40, 300])
def test_any_and_nearest_hit_match_linear_scan(rng, n_triangles: int) -> None:
    soup = random_soup(rng, n_triangles)
    bvh = build_bvh(soup)
    origins, dirs = random_rays(rng, 500)
    t = linear_scan(soup, origins, dirs, 12.0)

    np.testing.assert_array_equal(bvh.any_hit(origins, dirs, 12.0), np.isfinite(t).any(axis=1))
    best_t, best_tri = bvh.nearest_hit(origins, dirs, 12.0)
    np.testing.assert_array_equal(best_t, t.min(axis=1))
    expected_tri = np.where(np.isfinite(t).any(axis=1), t.argmin(axis=1), -1)
    np.testing.assert_array_equal(best_tri, expected_tri)


def test_masked_queries_ignore_filtered_triangles(rng) -> None:
    soup = random_soup(rng, 200)
    bvh = build_bvh(soup)
    mask = soup.kinds == TriangleKind.LEAF
    origins, dirs = random_rays(rng, 300)
    t = linear_scan(soup, origins, dirs, np.inf)
    t[:, ~mask] = np.inf
    np.testing.assert_array_equal(bvh.any_hit(origins, dirs, np.inf, mask), np.isfinite(t).any(axis=1))


def test_predicate_filter_matches_mask(rng) -> None:
    soup = random_soup(rng, 60)
    bvh = build_bvh(soup)
    origins, dirs = random_rays(rng, 50)
    for o, d in zip(origins, dirs):
        ray = Ray(o, d)
        by_predicate = bvh_any_hit(bvh, ray, 20.0, lambda tri: tri.kind is TriangleKind.TRUNK)
        by_mask = bvh_any_hit(bvh, ray, 20.0, soup.kinds == TriangleKind.TRUNK)
        assert by_predicate == by_mask


def test_min_distance_matches_brute_force(rng) -> None:
    soup = random_soup(rng, 150)
    bvh = build_bvh(soup)
    points = rng.uniform(-7, 7, size=(100, 3))
    v = soup.vertices
    brute = np.array(
        [point_triangle_distances(np.repeat(p[None], len(soup), 0), v[:, 0], v[:, 1], v[:, 2]).min() for p in points]
    )
    np.testing.assert_allclose(bvh.min_distance(points), brute, rtol=0, atol=1e-12)


def test_empty_scene_never_hits() -> None:
    bvh = build_bvh(TriangleSoup.empty())
    assert bvh.is_empty
    assert not bvh_any_hit(bvh, Ray(vec3(0, 0, 0), vec3(1, 0, 0)), 100.0)
    assert bvh_nearest_hit(bvh, Ray(vec3(0, 0, 0), vec3(1, 0, 0)), 100.0) is None
    assert np.isinf(bvh.min_distance(np.zeros((2, 3)))).all()


def test_build_is_deterministic(rng) -> None:
    soup = random_soup(rng, 100)
    a, b = build_bvh(soup), build_bvh(soup)
    np.testing.assert_array_equal(a.triangle_indices, b.triangle_indices)
    np.testing.assert_array_equal(a.node_min, b.node_min)


def test_leaves_partition_the_triangles(rng) -> None:
    soup = random_soup(rng, 77)
    bvh = build_bvh(soup)
    assert sorted(bvh.triangle_indices.tolist()) == list(range(77))
    assert int(bvh.count.sum()) == 77


def test_mask_shape_is_checked(rng) -> None:
    bvh = build_bvh(random_soup(rng, 10))
    with pytest.raises(ValueError):
        bvh.any_hit(np.zeros(3), np.array([1.0, 0, 0]), 1.0, np.ones(3, dtype=bool))


@pytest.mark.slow
def test_ten_thousand_triangles_match_linear_scan(rng) -> None:
    soup = random_soup(rng, 10_000)
    bvh = build_bvh(soup)
    origins, dirs = random_rays(rng, 200)
    t = np.stack([linear_scan(soup, origins[i : i + 1], dirs[i : i + 1], 12.0)[0] for i in range(len(origins))])
    best_t, best_tri = bvh.nearest_hit(origins, dirs, 12.0)
    np.testing.assert_array_equal(best_t, t.min(axis=1))
    np.testing.assert_array_equal(best_tri, np.where(np.isfinite(t).any(axis=1), t.argmin(axis=1), -1))
    np.testing.assert_array_equal(bvh.any_hit(origins, dirs, 12.0), np.isfinite(t).any(axis=1))


@pytest.mark.slow
def test_min_distance_along_an_orchard_alley_is_exact_and_bounded_in_memory() -> None:
    preset = get_preset("apple-like")
    layout = OrchardLayout(rows=2, cols=7, row_spacing=4.0, tree_spacing=3.5, position_jitter=0.15)
    soup = generate_orchard(preset.params, layout, seed=0).triangles
    bvh = build_bvh(soup)
    path = np.column_stack([np.linspace(-12.0, 12.0, 600), np.zeros(600), np.full(600, 1.5)])

    tracemalloc.start()
    try:
        clearance = bvh.min_distance(path)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()

    assert peak < 256 * 2**20
    v = soup.vertices
    for i in range(0, 600, 20):
        brute = point_triangle_distances(np.repeat(path[i][None], len(soup), 0), v[:, 0], v[:, 1], v[:, 2]).min()
        assert clearance[i] == pytest.approx(brute, abs=1e-12)


def test_min_distance_honours_the_cap_and_mask(rng) -> None:
    soup = random_soup(rng, 120)
    bvh = build_bvh(soup)
    points = rng.uniform(-7, 7, size=(150, 3))
    capped = bvh.min_distance(points, max_distance=0.5)
    full = bvh.min_distance(points)
    np.testing.assert_array_equal(capped, np.minimum(full, 0.5))

    mask = soup.kinds == TriangleKind.LEAF
    v = soup.vertices[mask]
    brute = np.array(
        [point_triangle_distances(np.repeat(p[None], len(v), 0), v[:, 0], v[:, 1], v[:, 2]).min() for p in points]
    )
    np.testing.assert_allclose(bvh.min_distance(points, mask=mask), brute, rtol=0, atol=1e-12)
