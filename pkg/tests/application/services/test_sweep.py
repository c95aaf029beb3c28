import math

import numpy as np
import pytest

from src.application.orchard.presets import get_preset
from src.application.orchard.rng import derive_seed
from src.application.services.coverage_paths import named_mount_set
from src.application.services.sweep import run_sweep, summarize_rows, sweep_csv_rows, sweep_paths
from src.domain.entities.trajectory import Intrinsics, PathPattern, SweepCell, SweepRow, SweepSpec, SweepTable
from tests.scenes import TINY_LAYOUT, TINY_PARAMS

K = Intrinsics(math.radians(90), math.radians(70), 15.0, 32, 24)


def small_spec(pattern: PathPattern = PathPattern.STRAIGHT_ROWS) -> SweepSpec:
    return SweepSpec(
        heights=(1.0, 2.5),
        mount_sets=(named_mount_set("front", K), named_mount_set("dual_side", K)),
        seeds=(3, 4),
        pattern=pattern,
        sample_spacing=0.5,
    )


@pytest.fixture(scope="module")
def table() -> SweepTable:
    return run_sweep(small_spec(), TINY_PARAMS, TINY_LAYOUT)


def test_rows_follow_height_mount_seed_order(table) -> None:
    keys = [(r.height, r.mounts, r.seed) for r in table.rows]
    assert keys == [
        (h, m, s) for h in (1.0, 2.5) for m in ("front", "dual_side") for s in (3, 4)
    ]
    assert all(0 <= r.n_visible <= r.total_fruits for r in table.rows)


def test_cells_hold_mean_and_sample_std(table) -> None:
    assert len(table.cells) == 4
    for cell in table.cells:
        fractions = [r.fraction for r in table.rows if (r.height, r.mounts) == (cell.height, cell.mounts)]
        assert cell.n_seeds == 2
        assert cell.mean_fraction == pytest.approx(np.mean(fractions))
        assert cell.std_fraction == pytest.approx(np.std(fractions, ddof=1))


def test_dual_side_sees_at_least_a_single_side(table) -> None:
    by_key = {(r.height, r.mounts, r.seed): r.n_visible for r in table.rows}
    side_left = run_sweep(
        SweepSpec((1.0, 2.5), (named_mount_set("side_left", K),), (3, 4)), TINY_PARAMS, TINY_LAYOUT
    )
    for r in side_left.rows:
        assert by_key[(r.height, "dual_side", r.seed)] >= r.n_visible


def test_threads_do_not_change_the_table(table) -> None:
    parallel = run_sweep(small_spec(), TINY_PARAMS, TINY_LAYOUT, max_workers=2)
    assert parallel.rows == table.rows
    assert parallel.cells == table.cells


def test_lawnmower_pattern_runs() -> None:
    t = run_sweep(
        SweepSpec((2.0,), (named_mount_set("down", K),), (3,), PathPattern.LAWNMOWER), TINY_PARAMS, TINY_LAYOUT
    )
    assert len(t.rows) == 1 and t.cells[0].std_fraction == 0.0


def test_sweep_paths_per_pattern(tiny_orchard) -> None:
    assert len(sweep_paths(tiny_orchard, PathPattern.STRAIGHT_ROWS, 2.0, 0.5)) == 2
    assert len(sweep_paths(tiny_orchard, PathPattern.LAWNMOWER, 2.0, 0.5)) == 1


def test_csv_rows_match_table(table) -> None:
    rows = sweep_csv_rows(table)
    assert len(rows) == len(table.rows)
    assert set(rows[0]) == {"height_m", "mounts", "seed", "n_visible", "total_fruits", "fraction"}


def _cells(fractions: dict[float, float]) -> SweepTable:
    cells = tuple(SweepCell(h, "front", f, 0.0, 1) for h, f in fractions.items())
    return SweepTable((), cells)


def test_best_height_and_interior_maximum() -> None:
    peaked = _cells({1.0: 0.2, 2.0: 0.5, 3.0: 0.4})
    assert peaked.best_height("front") == 2.0
    assert peaked.has_interior_maximum("front")
    rising = _cells({1.0: 0.2, 2.0: 0.3, 3.0: 0.4})
    assert rising.best_height("front") == 3.0
    assert not rising.has_interior_maximum("front")


def test_single_seed_std_is_zero() -> None:
    rows = (SweepRow(1.0, "front", 0, 3, 10),)
    (cell,) = summarize_rows(rows, (1.0,), (named_mount_set("front", K),))
    assert cell.mean_fraction == pytest.approx(0.3)
    assert cell.std_fraction == 0.0


@pytest.mark.slow
def test_walnut_row_sweep_favours_dual_side_cameras_with_an_interior_peak() -> None:
    preset = get_preset("walnut-like")
    k = Intrinsics(math.radians(90), math.radians(70), 15.0, 64, 48)
    heights = tuple(1.0 + 0.5 * i for i in range(15))
    spec = SweepSpec(
        heights,
        (named_mount_set("front", k), named_mount_set("dual_side", k)),
        tuple(derive_seed(0, "sweep", i) for i in range(4)),
        PathPattern.STRAIGHT_ROWS,
    )
    t = run_sweep(spec, preset.params, preset.layout, max_workers=4)
    mean = {(c.height, c.mounts): c.mean_fraction for c in t.cells}
    wins = sum(mean[(h, "dual_side")] >= mean[(h, "front")] for h in heights)
    assert wins >= 14
    assert t.has_interior_maximum("dual_side")
