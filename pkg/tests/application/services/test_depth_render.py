import numpy as np
import pytest

from src.application.geometry.bvh import build_bvh
from src.application.services.depth_render import (
    back_project,
    pixel_ray,
    project_point,
    project_points,
    render_depth,
)
from src.domain.entities.geometry import TriangleSoup
from tests.scenes import box, camera, wall_x


def test_wall_ahead_has_constant_axis_depth() -> None:
    depth = render_depth(camera(), build_bvh(wall_x(3.0)))
    np.testing.assert_allclose(depth.axis_depths, 3.0, rtol=1e-9)
    assert np.all(depth.depths >= 3.0 - 1e-9)
    # Corners are farther along the ray than the centre.
    assert depth.depths[0, 0] > depth.depths[24, 32]


def test_empty_scene_is_all_no_hit() -> None:
    depth = render_depth(camera(), build_bvh(TriangleSoup.empty()))
    assert np.all(np.isinf(depth.depths))


def test_geometry_beyond_far_is_not_seen() -> None:
    depth = render_depth(camera(far=15.0), build_bvh(wall_x(20.0)))
    assert np.all(np.isinf(depth.depths))


def test_box_shows_up_in_the_middle_of_the_image() -> None:
    depth = render_depth(camera(), build_bvh(box((4.0, 0.0, 0.0), (0.5, 0.5, 0.5))))
    assert depth.depths[24, 32] == pytest.approx(3.5, rel=1e-3)
    assert np.isinf(depth.depths[0, 0])


def test_banded_rendering_matches_single_thread() -> None:
    bvh = build_bvh(TriangleSoup.concat([wall_x(6.0), box((3.0, 0.8, -0.4), (0.4, 0.6, 0.3))]))
    cam = camera(yaw=0.1, pitch=0.05)
    np.testing.assert_array_equal(render_depth(cam, bvh, max_workers=3).depths, render_depth(cam, bvh).depths)


def test_project_point_on_axis_hits_the_principal_point() -> None:
    assert project_point(camera(), (5.0, 0.0, 0.0)) == pytest.approx((32.0, 24.0, 5.0))


def test_project_point_image_directions() -> None:
    u, v, _ = project_point(camera(), (5.0, 1.0, 1.0))
    assert u < 32.0 and v < 24.0


@pytest.mark.parametrize("p", [(-5.0, 0.0, 0.0), (0.0, 0.0, 0.0), (1.0, 5.0, 0.0), (1.0, 0.0, -5.0)])
def test_project_point_rejects_points_out_of_view(p) -> None:
    assert project_point(camera(), p) is None


def test_back_project_inverts_projection(rng) -> None:
    cam = camera((1.0, -2.0, 0.5), yaw=0.7, pitch=-0.2)
    for _ in range(20):
        p = cam.position + cam.axis * rng.uniform(1, 10) + rng.normal(scale=0.3, size=3)
        hit = project_point(cam, p)
        if hit is None:
            continue
        u, v, r = hit
        np.testing.assert_allclose(back_project(cam, u, v, r), p, atol=1e-9)


def test_projection_matrix_agrees_with_project_points(rng) -> None:
    cam = camera((0.5, 0.5, 1.0), yaw=-0.4, pitch=0.3)
    pts = cam.position + cam.axis * 4.0 + rng.normal(scale=0.5, size=(10, 3))
    uv, x = project_points(cam, pts)
    h = np.hstack([pts, np.ones((10, 1))]) @ cam.projection_matrix().T
    np.testing.assert_allclose(h[:, :2] / h[:, 2:], uv, atol=1e-9)
    np.testing.assert_allclose(h[:, 2], x, atol=1e-12)


def test_pixel_ray_through_centre_is_the_axis() -> None:
    cam = camera(yaw=1.0, pitch=0.2)
    np.testing.assert_allclose(pixel_ray(cam, 32.0, 24.0), cam.axis, atol=1e-12)
