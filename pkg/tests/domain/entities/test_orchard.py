import numpy as np
import pytest

from src.domain.entities.orchard import FruitRecord, OrchardLayout, TreeParams
from tests.scenes import TINY_PARAMS, make_orchard


def test_tree_params_round_trip_through_dict() -> None:
    assert TreeParams.from_dict(TINY_PARAMS.to_dict()) == TINY_PARAMS


def test_tree_params_rejects_unknown_fields() -> None:
    with pytest.raises(ValueError, match="Unknown"):
        TreeParams.from_dict({**TINY_PARAMS.to_dict(), "bark": 1})


@pytest.mark.parametrize(
    "field, value",
    [
        ("trunk_height", 0.0),
        ("branching_levels", 0),
        ("branch_length_ratio", 1.0),
        ("fruit_count", (5, 2)),
        ("branch_pitch", (0.0, 2.0)),
        ("fruit_height_peak", 1.2),
        ("fruit_height_peak", -0.1),
    ],
)
def test_tree_params_validation(field: str, value) -> None:
    data = {**TINY_PARAMS.to_dict(), field: value}
    with pytest.raises(ValueError):
        TreeParams.from_dict(data)


def test_layout_jitter_must_stay_below_half_spacing() -> None:
    with pytest.raises(ValueError):
        OrchardLayout(rows=1, cols=2, row_spacing=4.0, tree_spacing=3.0, position_jitter=1.5)


def test_fruit_keys_must_be_unique() -> None:
    model = make_orchard([(1, 0, 0), (2, 0, 0)])
    with pytest.raises(ValueError):
        type(model)(
            model.params,
            model.layout,
            model.seed,
            model.triangles,
            (FruitRecord(0, 0, np.zeros(3), 0.1), FruitRecord(0, 0, np.ones(3), 0.1)),
            model.bounds,
            model.tree_bases,
        )


def test_fruit_lookup_by_key() -> None:
    model = make_orchard([(1, 0, 0), (2, 0, 0)])
    np.testing.assert_array_equal(model.fruit((0, 1)).center, [2, 0, 0])
    assert model.fruit((0, 9)) is None
    assert model.fruits_per_tree() == {0: 2}
