"""
Use-case: sweep flight height and camera mounting over several orchard seeds.
"""

from src.application.services.sweep import run_sweep, sweep_csv_rows
from src.domain.entities.orchard import OrchardLayout, TreeParams
from src.domain.entities.trajectory import SweepSpec, SweepTable
from src.domain.ports.observability_port import IObservabilityHandler
from src.domain.ports.report_writer_port import IReportWriter

SWEEP_COLUMNS = ("height_m", "mounts", "seed", "n_visible", "total_fruits", "fraction")


class RunSweepUseCase:
    def __init__(self, writer: IReportWriter, observability: IObservabilityHandler) -> None:
        self._writer = writer
        self._observability = observability

    def execute(
        self,
        spec: SweepSpec,
        params: TreeParams,
        layout: OrchardLayout,
        max_workers: int = 1,
    ) -> SweepTable:
        with self._observability.span(
            "sweep",
            input={"heights": list(spec.heights), "seeds": len(spec.seeds), "pattern": spec.pattern.value},
        ) as out:
            table = run_sweep(spec, params, layout, max_workers=max_workers)
            out.update(rows=len(table.rows))

        rows = sweep_csv_rows(table)
        self._writer.write_csv("sweep", SWEEP_COLUMNS, ([r[c] for c in SWEEP_COLUMNS] for r in rows))
        self._writer.write_json(
            "sweep",
            {
                "rows": rows,
                "cells": [
                    {
                        "height_m": c.height,
                        "mounts": c.mounts,
                        "mean_fraction": c.mean_fraction,
                        "std_fraction": c.std_fraction,
                        "n_seeds": c.n_seeds,
                    }
                    for c in table.cells
                ],
                "best_height": {m.name: table.best_height(m.name) for m in spec.mount_sets},
                "interior_maximum": {m.name: table.has_interior_maximum(m.name) for m in spec.mount_sets},
            },
        )
        return table
