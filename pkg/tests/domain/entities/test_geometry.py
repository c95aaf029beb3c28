import numpy as np
import pytest

from src.domain.entities.geometry import Aabb, Ray, Triangle, TriangleKind, TriangleSoup, vec3
from src.domain.errors import GeometryError


def test_ray_requires_unit_direction() -> None:
    with pytest.raises(GeometryError):
        Ray(vec3(0, 0, 0), vec3(1, 1, 0))


def test_ray_towards_returns_distance() -> None:
    ray, dist = Ray.towards(vec3(1, 1, 1), vec3(1, 1, 4))
    assert dist == pytest.approx(3.0)
    np.testing.assert_allclose(ray.at(dist), [1, 1, 4])


def test_vec3_rejects_non_finite() -> None:
    with pytest.raises(GeometryError):
        vec3(0.0, np.nan, 1.0)


def test_fruit_id_only_on_fruit_triangles() -> None:
    v = ([0, 0, 0], [1, 0, 0], [0, 1, 0])
    Triangle(*v, TriangleKind.FRUIT, tree_id=0, fruit_id=3)
    with pytest.raises(GeometryError):
        Triangle(*v, TriangleKind.LEAF, tree_id=0, fruit_id=3)
    with pytest.raises(GeometryError):
        Triangle(*v, TriangleKind.FRUIT, tree_id=0)


def test_aabb_rejects_inverted_bounds() -> None:
    with pytest.raises(GeometryError):
        Aabb(np.array([1.0, 0, 0]), np.array([0.0, 1, 1]))


def test_aabb_contains_and_union() -> None:
    a = Aabb(np.zeros(3), np.ones(3))
    b = Aabb(np.full(3, 2.0), np.full(3, 3.0))
    u = a.union(b)
    assert u.contains(np.array([2.5, 0.5, 1.5]))
    assert not a.contains(np.array([1.01, 0.5, 0.5]))
    assert a.contains(np.array([1.01, 0.5, 0.5]), tol=0.02)


def test_soup_round_trips_triangles() -> None:
    tris = [
        Triangle([0, 0, 0], [1, 0, 0], [0, 1, 0], TriangleKind.TRUNK, 0),
        Triangle([0, 0, 1], [1, 0, 1], [0, 1, 1], TriangleKind.FRUIT, 2, fruit_id=5),
    ]
    soup = TriangleSoup.from_triangles(tris)
    assert len(soup) == 2
    back = soup[1]
    assert back.kind is TriangleKind.FRUIT
    assert (back.tree_id, back.fruit_id) == (2, 5)
    np.testing.assert_array_equal(back.vertices, tris[1].vertices)
    assert soup[0].fruit_id is None


def test_soup_is_read_only() -> None:
    soup = TriangleSoup.from_triangles([Triangle([0, 0, 0], [1, 0, 0], [0, 1, 0], TriangleKind.LEAF, 0)])
    with pytest.raises(ValueError):
        soup.vertices[0, 0, 0] = 5.0


def test_empty_soup_has_no_bounds() -> None:
    assert TriangleSoup.empty().bounds() is None
    assert len(TriangleSoup.concat([])) == 0
