import math

import numpy as np
import pytest

from src.application.geometry.bvh import build_bvh
from src.application.geometry.frustum import frustum_contains_points
from src.application.geometry.intersect import EPS_RAY, moller_trumbore
from src.application.orchard.generator import generate_orchard
from src.application.services.visibility import (
    count_visible,
    observation_rows,
    visibility_heatmap,
    vertical_profile,
    visible_fruits_one,
)
from src.domain.entities.camera import CameraConfig, camera_rotation
from src.domain.entities.geometry import OCCLUDER_KINDS
from src.domain.entities.visibility import VisibilityReport
from tests.scenes import TINY_LAYOUT, TINY_PARAMS, camera, make_orchard, wall_x


def visible(orchard, cam, fruits_occlude=False) -> set:
    return visible_fruits_one(cam, orchard, build_bvh(orchard.triangles), fruits_occlude)


def test_unobstructed_fruit_is_visible() -> None:
    orchard = make_orchard([(4.0, 0.3, 0.2)])
    assert visible(orchard, camera()) == {(0, 0)}


def test_occluder_between_camera_and_fruit_hides_it() -> None:
    orchard = make_orchard([(4.0, 0.3, 0.2)], [wall_x(2.0)])
    assert visible(orchard, camera()) == set()


def test_occluder_behind_fruit_does_not_hide_it() -> None:
    orchard = make_orchard([(4.0, 0.3, 0.2)], [wall_x(6.0)])
    assert visible(orchard, camera()) == {(0, 0)}


@pytest.mark.parametrize(
    "center",
    [(-4.0, 0.0, 0.0), (1.0, 3.0, 0.0), (1.0, 0.0, 2.0), (15.5, 0.1, 0.1)],
    ids=["behind", "left-of-fov", "above-fov", "beyond-far"],
)
def test_fruit_outside_frustum_is_not_visible(center) -> None:
    assert visible(make_orchard([center]), camera()) == set()


def test_fruits_occlude_each_other_only_when_enabled() -> None:
    near, far = (2.0, 0.005, 0.007), (4.0, 0.01, 0.014)
    orchard = make_orchard([near, far])
    assert visible(orchard, camera()) == {(0, 0), (0, 1)}
    assert visible(orchard, camera(), fruits_occlude=True) == {(0, 0)}


def test_count_visible_deduplicates_across_cameras() -> None:
    orchard = make_orchard([(4.0, 0.3, 0.2), (4.0, -0.3, 0.2), (-4.0, 0.0, 0.0)])
    cams = [camera(), camera(), camera(yaw=math.pi)]
    report = count_visible(cams, orchard)
    assert report.visible_keys == ((0, 0), (0, 1), (0, 2))
    assert report.n_visible == 3
    assert report.fraction_visible == 1.0
    assert len(report.observations) == 5
    assert [o.key for o in report.observations_for_camera(2)] == [(0, 2)]
    assert report.per_tree_visible == {0: 3}
    np.testing.assert_array_equal(report.visible_fruit_positions, orchard.fruit_centers)


def test_count_visible_with_no_cameras_or_fruits() -> None:
    report = count_visible([], make_orchard([(1.0, 0.0, 0.0)]))
    assert report.n_visible == 0
    assert report.observations == ()
    empty = count_visible([camera()], make_orchard([]))
    assert empty.fraction_visible == 0.0


def test_threads_do_not_change_the_report(tiny_orchard) -> None:
    cams = [camera((x, -2.0, 1.5), yaw=math.pi / 2) for x in np.linspace(-3, 3, 9)]
    serial = count_visible(cams, tiny_orchard)
    parallel = count_visible(cams, tiny_orchard, max_workers=4)
    assert serial.visible_keys == parallel.visible_keys
    assert serial.observations == parallel.observations


def look_at(position: np.ndarray, target: np.ndarray) -> CameraConfig:
    d = target - position
    yaw = math.atan2(d[1], d[0])
    pitch = math.atan2(d[2], math.hypot(d[0], d[1]))
    return CameraConfig(position, camera_rotation(yaw, pitch), math.radians(70), math.radians(55), 12.0, 64, 48)


def brute_force_visible(cam: CameraConfig, orchard) -> set:
    """Every fruit against every occluder triangle, with its own frustum test."""
    soup = orchard.triangles
    occ = soup.vertices[soup.kind_mask(OCCLUDER_KINDS)]
    rot = cam.orientation.as_matrix()
    seen = set()
    for f in orchard.fruits:
        local = rot.T @ (f.center - cam.position)
        if not (
            0 < local[0] <= cam.far
            and abs(local[1]) <= local[0] * math.tan(cam.hfov / 2)
            and abs(local[2]) <= local[0] * math.tan(cam.vfov / 2)
        ):
            continue
        dist = float(np.linalg.norm(f.center - cam.position))
        d = (f.center - cam.position) / dist
        n = occ.shape[0]
        t = moller_trumbore(
            np.repeat(cam.position[None], n, 0), np.repeat(d[None], n, 0), occ[:, 0], occ[:, 1], occ[:, 2]
        )
        if not np.any(t < dist - EPS_RAY):
            seen.add(f.key)
    return seen


def _compare_with_brute_force(seed: int) -> None:
    orchard = generate_orchard(TINY_PARAMS, TINY_LAYOUT, seed=seed)
    bvh = build_bvh(orchard.triangles)
    rng = np.random.default_rng(seed)
    for _ in range(6):
        target = orchard.fruit_centers[rng.integers(orchard.total_fruits)] + rng.normal(scale=0.3, size=3)
        position = target + rng.uniform(-1, 1, size=3) * np.array([4.0, 4.0, 1.5]) + np.array([0, 0, 0.5])
        if np.linalg.norm(target - position) < 0.5:
            continue
        cam = look_at(position, target)
        assert visible_fruits_one(cam, orchard, bvh) == brute_force_visible(cam, orchard)


@pytest.mark.parametrize("seed", range(5))
def test_matches_brute_force_on_random_orchards(seed: int) -> None:
    _compare_with_brute_force(seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5, 55))
def test_matches_brute_force_on_many_orchards(seed: int) -> None:
    _compare_with_brute_force(seed)


def _report(positions) -> VisibilityReport:
    pts = np.array(positions, dtype=float).reshape(-1, 3)
    keys = tuple((0, i) for i in range(len(pts)))
    return VisibilityReport((), keys, pts, total_fruits=max(len(pts), 1))


def test_heatmap_bins_on_the_global_grid() -> None:
    heatmap = visibility_heatmap(_report([(0.1, 0.1, 0.1), (0.2, 0.3, 0.4), (1.1, 0.1, 0.1)]), bin_size=0.5)
    assert heatmap.counts.shape == (3, 1, 1)
    np.testing.assert_array_equal(heatmap.counts[:, 0, 0], [2, 0, 1])
    np.testing.assert_array_equal(heatmap.origin, [0.0, 0.0, 0.0])
    assert heatmap.total == 3


def test_heatmap_origin_for_negative_positions() -> None:
    heatmap = visibility_heatmap(_report([(-0.1, 0.2, 1.2)]), bin_size=0.5)
    np.testing.assert_allclose(heatmap.origin, [-0.5, 0.0, 1.0])
    np.testing.assert_array_equal(heatmap.origin_index, [-1, 0, 2])


def test_heatmap_of_nothing_is_empty() -> None:
    assert visibility_heatmap(_report([]), bin_size=0.5).total == 0


def test_heatmap_rejects_bad_bin_size() -> None:
    with pytest.raises(ValueError):
        visibility_heatmap(_report([]), bin_size=0.0)


def test_vertical_profile_counts_layers() -> None:
    orchard = make_orchard([(4.0, 0.0, 0.1), (4.0, 0.5, 0.3), (4.0, -0.5, 1.2)])
    report = VisibilityReport(
        (), ((0, 0), (0, 2)), orchard.fruit_centers[[0, 2]], total_fruits=3
    )
    layers = vertical_profile(report, orchard, layer_height=0.5)
    assert [(l.z_min, l.z_max) for l in layers] == [(0.0, 0.5), (0.5, 1.0), (1.0, 1.5)]
    assert [l.total for l in layers] == [2, 0, 1]
    assert [l.visible for l in layers] == [1, 0, 1]


def test_observation_rows_carry_fruit_positions() -> None:
    orchard = make_orchard([(4.0, 0.3, 0.2)])
    report = count_visible([camera(), camera()], orchard)
    rows = observation_rows(report, orchard)
    assert [r["camera_index"] for r in rows] == [0, 1]
    assert rows[0] == {"camera_index": 0, "tree_id": 0, "fruit_id": 0, "x": 4.0, "y": 0.3, "z": 0.2}


def random_cameras(rng: np.random.Generator, n: int) -> list[CameraConfig]:
    return [
        camera(
            position=(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0.5, 3.0)),
            yaw=rng.uniform(-math.pi, math.pi),
            pitch=rng.uniform(-0.5, 0.5),
        )
        for _ in range(n)
    ]


def test_adding_a_camera_never_lowers_the_count(tiny_orchard, rng) -> None:
    bvh = build_bvh(tiny_orchard.triangles)
    cams = random_cameras(rng, 12)
    previous = 0
    for k in range(1, len(cams) + 1):
        report = count_visible(cams[:k], tiny_orchard, bvh)
        assert report.n_visible >= previous
        assert set(report.visible_keys) >= set(count_visible(cams[: k - 1], tiny_orchard, bvh).visible_keys)
        previous = report.n_visible


def test_without_occluders_visibility_is_the_frustum_test(rng) -> None:
    centers = rng.uniform(-5, 5, size=(80, 3))
    orchard = make_orchard(centers)
    for cam in random_cameras(rng, 10):
        inside = frustum_contains_points(cam.frustum(), orchard.fruit_centers)
        expected = {(0, int(i)) for i in np.flatnonzero(inside)}
        assert visible(orchard, cam) == expected
