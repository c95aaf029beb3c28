import numpy as np
import pytest

from src.application.geometry.intersect import (
    EPS_RAY,
    moller_trumbore,
    point_triangle_distances,
    ray_triangle_intersect,
)
from src.domain.entities.geometry import Ray, Triangle, TriangleKind, vec3

TRI = Triangle([0, 0, 0], [1, 0, 0], [0, 1, 0], TriangleKind.LEAF, 0)
DOWN = vec3(0, 0, -1)


def test_hit_returns_ray_parameter() -> None:
    assert ray_triangle_intersect(Ray(vec3(0.2, 0.2, 1.0), DOWN), TRI, 10.0) == pytest.approx(1.0)


def test_miss_outside_triangle() -> None:
    assert ray_triangle_intersect(Ray(vec3(2.0, 2.0, 1.0), DOWN), TRI, 10.0) is None


def test_edge_graze_is_not_a_hit() -> None:
    assert ray_triangle_intersect(Ray(vec3(0.5, 0.0, 1.0), DOWN), TRI, 10.0) is None


def test_t_max_is_exclusive() -> None:
    ray = Ray(vec3(0.2, 0.2, 1.0), DOWN)
    assert ray_triangle_intersect(ray, TRI, 1.0) is None
    assert ray_triangle_intersect(ray, TRI, 1.0 + 1e-9) == pytest.approx(1.0)


def test_triangle_behind_origin_is_ignored() -> None:
    assert ray_triangle_intersect(Ray(vec3(0.2, 0.2, -1.0), DOWN), TRI, 10.0) is None


def test_hit_closer_than_eps_is_ignored() -> None:
    assert ray_triangle_intersect(Ray(vec3(0.2, 0.2, EPS_RAY / 2), DOWN), TRI, 10.0) is None


def test_parallel_ray_misses() -> None:
    assert ray_triangle_intersect(Ray(vec3(-1.0, 0.2, 0.0), vec3(1, 0, 0)), TRI, 10.0) is None


def test_degenerate_triangle_never_hits() -> None:
    flat = Triangle([0, 0, 0], [1, 0, 0], [2, 0, 0], TriangleKind.LEAF, 0)
    assert ray_triangle_intersect(Ray(vec3(0.5, 0.0, 1.0), DOWN), flat, 10.0) is None


def test_non_positive_t_max_is_rejected() -> None:
    with pytest.raises(ValueError):
        ray_triangle_intersect(Ray(vec3(0.2, 0.2, 1.0), DOWN), TRI, 0.0)


@pytest.mark.parametrize(
    "point, expected",
    [
        ((0.2, 0.2, 2.0), 2.0),
        ((2.0, 0.0, 0.0), 1.0),
        ((-1.0, -1.0, 0.0), np.sqrt(2.0)),
        ((0.5, -1.0, 0.0), 1.0),
        ((1.0, 1.0, 0.0), np.sqrt(0.5)),
    ],
)
def test_point_triangle_distance(point, expected) -> None:
    d = point_triangle_distances(np.array([point], dtype=float), TRI.v0[None], TRI.v1[None], TRI.v2[None])
    assert d[0] == pytest.approx(expected)


def well_posed_pairs(rng: np.random.Generator, n: int) -> tuple[np.ndarray, ...]:
    """n random triangles with a unit direction that crosses each plane at a healthy angle."""
    v = rng.normal(size=(4 * n, 3, 3))
    d = rng.normal(size=(4 * n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    normal = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    area = 0.5 * np.linalg.norm(normal, axis=1)
    cos = np.abs(np.einsum("ij,ij->i", normal, d)) / np.maximum(2.0 * area, 1e-300)
    keep = np.flatnonzero((area > 0.1) & (cos > 0.3))[:n]
    assert keep.size == n
    return v[keep], d[keep]


def test_barycentric_oracle_on_a_thousand_pairs(rng) -> None:
    n = 1000
    v, d = well_posed_pairs(rng, n)
    bary = rng.dirichlet(np.ones(3), size=n)
    inside = bary.min(axis=1) > 0.01
    # Push half of the targets outside through one negative barycentric coordinate.
    outside = np.arange(n) % 2 == 1
    rows = np.flatnonzero(outside)
    k = rng.integers(0, 3, size=rows.size)
    x = rng.uniform(0.05, 0.5, size=rows.size)
    rest = bary[rows].sum(axis=1) - bary[rows, k]
    bary[rows] *= ((1.0 + x) / rest)[:, None]
    bary[rows, k] = -x
    target = np.einsum("ij,ijk->ik", bary, v)
    s = rng.uniform(0.5, 5.0, size=n)
    origins = target - s[:, None] * d

    t = moller_trumbore(origins, d, v[:, 0], v[:, 1], v[:, 2])

    hits = ~outside & inside
    np.testing.assert_allclose(t[hits], s[hits], rtol=1e-9)
    assert np.isinf(t[outside]).all()


def test_cyclic_vertex_order_does_not_change_hits(rng) -> None:
    v, d = well_posed_pairs(rng, 500)
    origins = rng.normal(scale=0.5, size=(500, 3)) - 3.0 * d
    t = moller_trumbore(origins, d, v[:, 0], v[:, 1], v[:, 2])
    for order in ((1, 2, 0), (2, 0, 1)):
        shifted = moller_trumbore(origins, d, v[:, order[0]], v[:, order[1]], v[:, order[2]])
        np.testing.assert_array_equal(np.isinf(shifted), np.isinf(t))
        np.testing.assert_allclose(shifted[np.isfinite(t)], t[np.isfinite(t)], rtol=1e-9)
