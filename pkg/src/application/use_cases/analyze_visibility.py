"""
Use-case: compare data-collection strategies by occlusion-aware fruit visibility.
Depends only on Domain ports and application services; no infrastructure imports.
"""

from typing import Sequence

from src.application.geometry.bvh import build_bvh
from src.application.services.coverage_paths import default_strategies
from src.application.services.visibility import (
    count_visible,
    observation_rows,
    vertical_profile,
    visibility_heatmap,
)
from src.domain.entities.orchard import OrchardModel
from src.domain.entities.trajectory import Intrinsics
from src.domain.entities.visibility import VisibilityReport
from src.domain.ports.observability_port import IObservabilityHandler
from src.domain.ports.report_writer_port import IReportWriter

OBSERVATION_COLUMNS = ("camera_index", "tree_id", "fruit_id", "x", "y", "z")


class AnalyzeVisibilityUseCase:
    def __init__(self, writer: IReportWriter, observability: IObservabilityHandler) -> None:
        self._writer = writer
        self._observability = observability

    def execute(
        self,
        model: OrchardModel,
        intrinsics: Intrinsics,
        strategies: Sequence[str],
        sample_spacing: float = 0.5,
        heatmap_bin: float = 0.5,
        profile_layer: float = 0.5,
        fruits_occlude: bool = False,
        max_workers: int = 1,
    ) -> dict[str, VisibilityReport]:
        """Count visible fruits for each named strategy and write the per-strategy artifacts.

        Artifacts: visibility_<name>.csv (observation multiset), visibility.json
        (counts, per-tree attribution, vertical profile, heat map).

        Raises:
            ValueError: if a strategy name is unknown.
        """
        available = default_strategies(model, intrinsics, sample_spacing)
        unknown = [s for s in strategies if s not in available]
        if unknown:
            raise ValueError(f"unknown strategies {unknown!r}; known: {sorted(available)}")

        bvh = build_bvh(model.triangles)
        reports: dict[str, VisibilityReport] = {}
        summary: dict[str, dict] = {}
        for name in strategies:
            strategy = available[name]
            cams = strategy.cameras()
            with self._observability.span("visibility", input={"strategy": name, "cameras": len(cams)}) as out:
                report = count_visible(cams, model, bvh, max_workers=max_workers, fruits_occlude=fruits_occlude)
                out.update(n_visible=report.n_visible, fraction=report.fraction_visible)
            reports[name] = report

            rows = observation_rows(report, model)
            self._writer.write_csv(
                f"visibility_{name}",
                OBSERVATION_COLUMNS,
                ([r[c] for c in OBSERVATION_COLUMNS] for r in rows),
            )
            heatmap = visibility_heatmap(report, model, heatmap_bin)
            summary[name] = {
                "cameras": len(cams),
                "observations": len(report.observations),
                "n_visible": report.n_visible,
                "total_fruits": report.total_fruits,
                "fraction_visible": report.fraction_visible,
                "per_tree": {
                    str(t): {"visible": report.per_tree_visible.get(t, 0), "total": total}
                    for t, total in report.per_tree_total.items()
                },
                "vertical_profile": [
                    {"z_min": layer.z_min, "z_max": layer.z_max, "visible": layer.visible, "total": layer.total}
                    for layer in vertical_profile(report, model, profile_layer)
                ],
                "heatmap": {
                    "origin": heatmap.origin.tolist(),
                    "bin_size": heatmap.bin_size,
                    "counts": heatmap.counts.tolist(),
                },
            }
        self._writer.write_json("visibility", summary)
        return reports
