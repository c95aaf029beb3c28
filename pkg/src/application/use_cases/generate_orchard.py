"""
Use-case: generate an orchard scene and persist it.
Depends only on Domain ports and application services; no infrastructure imports.
"""

from pathlib import Path
from typing import Optional

from src.application.orchard.generator import generate_orchard
from src.domain.entities.orchard import OrchardLayout, OrchardModel, TreeParams
from src.domain.ports.observability_port import IObservabilityHandler
from src.domain.ports.report_writer_port import IReportWriter
from src.domain.ports.scene_store_port import ISceneStore


class GenerateOrchardUseCase:
    def __init__(
        self,
        scene_store: ISceneStore,
        writer: IReportWriter,
        observability: IObservabilityHandler,
    ) -> None:
        self._scene_store = scene_store
        self._writer = writer
        self._observability = observability

    def execute(
        self,
        params: TreeParams,
        layout: OrchardLayout,
        seed: int,
        scene_path: Optional[Path] = None,
        max_workers: int = 1,
    ) -> OrchardModel:
        """Generate rows x cols trees from *seed*; save to *scene_path* when given.

        Also writes orchard.json with per-tree fruit counts and the scene bounds.
        """
        with self._observability.span(
            "generate",
            input={"seed": seed, "rows": layout.rows, "cols": layout.cols},
        ) as out:
            model = generate_orchard(params, layout, seed, max_workers=max_workers)
            if scene_path is not None:
                self._scene_store.save(model, scene_path)
            summary = {
                "seed": seed,
                "trees": layout.tree_count,
                "triangles": len(model.triangles),
                "total_fruits": model.total_fruits,
                "fruits_per_tree": {str(k): v for k, v in model.fruits_per_tree().items()},
                "bounds": {"min": model.bounds.min.tolist(), "max": model.bounds.max.tolist()},
                "params": params.to_dict(),
                "layout": layout.to_dict(),
                "scene": None if scene_path is None else str(scene_path),
            }
            self._writer.write_json("orchard", summary)
            out.update(triangles=summary["triangles"], total_fruits=summary["total_fruits"])
        return model
