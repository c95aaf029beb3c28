"""
Named species presets.

These dimensions are plausible for each species but are NOT calibrated against
any reference plant model; treat experiment numbers derived from them as
relative comparisons only.
"""

from __future__ import annotations

from dataclasses import dataclass

from src.domain.entities.orchard import OrchardLayout, TreeParams


@dataclass(frozen=True)
class SpeciesPreset:
    name: str
    params: TreeParams
    layout: OrchardLayout
    calibrated: bool = False


PRESETS: dict[str, SpeciesPreset] = {
    "walnut-like": SpeciesPreset(
        name="walnut-like",
        params=TreeParams(
            trunk_height=2.0,
            trunk_radius=0.18,
            branching_levels=5,
            branches_per_node=(2, 4),
            branch_length_ratio=0.7,
            branch_pitch=(0.3, 1.1),
            leaf_count_per_terminal=(12, 18),
            leaf_size=0.2,
            fruit_count=(60, 90),
            fruit_radius=0.025,
            canopy_radius=3.2,
            fruit_height_peak=0.8,
        ),
        layout=OrchardLayout(rows=2, cols=5, row_spacing=7.6, tree_spacing=7.3, position_jitter=0.3),
    ),
    "orange-like": SpeciesPreset(
        name="orange-like",
        params=TreeParams(
            trunk_height=0.8,
            trunk_radius=0.1,
            branching_levels=5,
            branches_per_node=(2, 4),
            branch_length_ratio=0.75,
            branch_pitch=(0.2, 1.2),
            leaf_count_per_terminal=(15, 25),
            leaf_size=0.08,
            fruit_count=(80, 150),
            fruit_radius=0.04,
            canopy_radius=2.0,
        ),
        layout=OrchardLayout(rows=2, cols=5, row_spacing=6.0, tree_spacing=4.5, position_jitter=0.2),
    ),
    "almond-like": SpeciesPreset(
        name="almond-like",
        params=TreeParams(
            trunk_height=1.0,
            trunk_radius=0.14,
            branching_levels=5,
            branches_per_node=(2, 3),
            branch_length_ratio=0.7,
            branch_pitch=(0.5, 1.2),
            leaf_count_per_terminal=(10, 16),
            leaf_size=0.1,
            fruit_count=(100, 200),
            fruit_radius=0.015,
            canopy_radius=2.5,
        ),
        layout=OrchardLayout(rows=2, cols=5, row_spacing=7.0, tree_spacing=6.0, position_jitter=0.25),
    ),
    "apple-like": SpeciesPreset(
        name="apple-like",
        params=TreeParams(
            trunk_height=0.9,
            trunk_radius=0.08,
            branching_levels=4,
            branches_per_node=(2, 4),
            branch_length_ratio=0.7,
            branch_pitch=(0.1, 0.8),
            leaf_count_per_terminal=(12, 20),
            leaf_size=0.08,
            fruit_count=(40, 80),
            fruit_radius=0.04,
            canopy_radius=1.6,
        ),
        layout=OrchardLayout(rows=2, cols=5, row_spacing=4.0, tree_spacing=3.5, position_jitter=0.15),
    ),
}


def get_preset(name: str) -> SpeciesPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown species preset {name!r}; known: {sorted(PRESETS)}") from None
