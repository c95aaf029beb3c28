"""
Command-line entry point and composition root.

    canopysim generate   --config exp.toml --scene orchard.scn
    canopysim visibility --config exp.toml --scene orchard.scn --out results/
    canopysim sweep      --config exp.toml --threads 4
    canopysim fly        --config exp.toml --scene orchard.scn
    canopysim count      --config exp.toml --scene orchard.scn
    canopysim report     --out results/

Commands that take --scene generate the orchard from the config when the flag is
omitted. Exit codes: 0 success, 2 config error, 3 runtime error; failures print
one JSON object {"error", "message"} on stderr.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from src.application.geometry.bvh import build_bvh
from src.application.orchard.generator import generate_orchard
from src.application.planning.flight import FlightConfig
from src.application.services.coverage_paths import mount_cameras, orbit_path, row_center_lines
from src.application.use_cases.analyze_visibility import AnalyzeVisibilityUseCase
from src.application.use_cases.count_fruits import CountFruitsUseCase
from src.application.use_cases.generate_orchard import GenerateOrchardUseCase
from src.application.use_cases.run_sweep import RunSweepUseCase
from src.application.use_cases.simulate_flight import SimulateFlightUseCase
from src.application.use_cases.summarize_reports import SummarizeReportsUseCase
from src.domain.entities.camera import CameraConfig
from src.domain.entities.orchard import OrchardModel
from src.domain.entities.trajectory import MountConfig, MountKind
from src.domain.errors import CanopySimError, ConfigError
from src.domain.ports.observability_port import IObservabilityHandler
from src.infrastructure.config.experiment_config import ExperimentConfig, load_config
from src.infrastructure.observability.langfuse_adapter import LangfuseObservabilityHandler, langfuse_configured
from src.infrastructure.observability.logging_handler import LoggingObservabilityHandler
from src.infrastructure.observability.logging_setup import configure_logging
from src.infrastructure.reports.file_report_writer import FileReportWriter
from src.infrastructure.scene_store.binary_scene_store import BinarySceneStore
from src.infrastructure.sensors.raycast_depth_sensor import RaycastDepthSensor

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
DEFAULT_SCENE = "orchard.scn"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="canopysim", description="Orchard data-collection simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (.json or .toml)")
    common.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
    common.add_argument("--seed-override", type=int, help="replace orchard.seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    scene = argparse.ArgumentParser(add_help=False)
    scene.add_argument("--scene", type=Path, help="scene file; generated from the config when omitted")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common, scene], help="generate and save an orchard scene")
    sub.add_parser("visibility", parents=[common, scene], help="compare data-collection strategies")
    sub.add_parser("sweep", parents=[common], help="flight height x camera mounting sweep")
    sub.add_parser("fly", parents=[common, scene], help="closed-loop local planner flight")
    sub.add_parser("count", parents=[common, scene], help="detect-track-triangulate-cluster fruit count")
    sub.add_parser("report", parents=[common], help="summarize the outputs of previous commands")
    return parser


def _observability() -> IObservabilityHandler:
    if langfuse_configured():
        logger.info("observability backend=langfuse")
        return LangfuseObservabilityHandler()
    return LoggingObservabilityHandler()


class CommandRunner:
    """Wires adapters into use cases for one CLI invocation."""

    def __init__(
        self,
        config: ExperimentConfig,
        out_dir: Path,
        threads: int,
        observability: IObservabilityHandler,
    ) -> None:
        if threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {threads!r}")
        self.config = config
        self.threads = threads
        self.writer = FileReportWriter(out_dir)
        self.scene_store = BinarySceneStore()
        self.observability = observability

    def _orchard(self, scene: Optional[Path]) -> OrchardModel:
        if scene is not None:
            return self.scene_store.load(scene)
        c = self.config.orchard
        return generate_orchard(c.tree_params(), c.layout(), c.seed, max_workers=self.threads)

    def generate(self, scene: Optional[Path]) -> dict:
        c = self.config.orchard
        path = scene if scene is not None else self.writer.out_dir / DEFAULT_SCENE
        model = GenerateOrchardUseCase(self.scene_store, self.writer, self.observability).execute(
            c.tree_params(), c.layout(), c.seed, scene_path=path, max_workers=self.threads
        )
        return {
            "scene": str(path),
            "trees": model.layout.tree_count,
            "triangles": len(model.triangles),
            "fruits": model.total_fruits,
        }

    def visibility(self, scene: Optional[Path]) -> dict:
        v = self.config.visibility
        reports = AnalyzeVisibilityUseCase(self.writer, self.observability).execute(
            self._orchard(scene),
            self.config.camera.intrinsics(),
            v.strategies,
            sample_spacing=v.sample_spacing,
            heatmap_bin=v.heatmap_bin,
            profile_layer=v.profile_layer,
            fruits_occlude=v.fruits_occlude,
            max_workers=self.threads,
        )
        return {name: round(r.fraction_visible, 4) for name, r in reports.items()}

    def sweep(self) -> dict:
        c = self.config
        spec = c.sweep.spec(c.orchard.seed, c.camera.intrinsics())
        table = RunSweepUseCase(self.writer, self.observability).execute(
            spec, c.orchard.tree_params(), c.orchard.layout(), max_workers=self.threads
        )
        return {m.name: table.best_height(m.name) for m in spec.mount_sets}

    def flight_config(self, model: OrchardModel) -> FlightConfig:
        c = self.config
        f = c.flight
        start, goal = f.start, f.goal
        if start is None or goal is None:
            a, _ = row_center_lines(model)[0]
            height = 0.5 * (model.params.trunk_height + float(model.bounds.max[2]))
            default_start = np.array([a[0], a[1], height])
            start = start or tuple(default_start.tolist())
            goal = goal or tuple((np.asarray(start) + [f.length, 0.0, 0.0]).tolist())
        return FlightConfig(
            start=tuple(start),
            goal=tuple(goal),
            limits=c.planner.limits(),
            sampler=c.planner.sampler(c.orchard.seed),
            intrinsics=c.camera.intrinsics(),
            depth_rate=f.depth_rate,
            max_steps=f.max_steps,
            goal_tolerance=f.goal_tolerance,
        )

    def fly(self, scene: Optional[Path]) -> dict:
        model = self._orchard(scene)
        bvh = build_bvh(model.triangles)
        sensor = RaycastDepthSensor(bvh, max_workers=self.threads)
        summary = SimulateFlightUseCase(sensor, self.writer, self.observability).execute(
            self.flight_config(model), bvh, write_depth_debug=self.config.output.write_depth_debug
        )
        return {k: summary[k] for k in ("reached", "steps", "fallbacks", "min_clearance_m", "contact")}

    def counting_cameras(self, model: OrchardModel) -> list[CameraConfig]:
        k = self.config.counting
        if k.tree_id >= model.tree_bases.shape[0]:
            raise ConfigError(f"counting.tree_id {k.tree_id!r} out of range for {model.tree_bases.shape[0]} trees")
        base = model.tree_bases[k.tree_id]
        radius = k.orbit_radius if k.orbit_radius is not None else model.params.canopy_radius + 2.0
        height = (
            k.orbit_height
            if k.orbit_height is not None
            else model.params.trunk_height + 0.5 * model.params.canopy_radius
        )
        seq = orbit_path(base[:2], radius, height, np.radians(k.arc_deg), k.sample_spacing)
        return mount_cameras(seq, [MountConfig(MountKind.SIDE_LEFT, k.camera.intrinsics())])

    def count(self, scene: Optional[Path]) -> dict:
        k = self.config.counting
        model = self._orchard(scene)
        summary = CountFruitsUseCase(self.writer, self.observability).execute(
            model,
            self.counting_cameras(model),
            k.noise.model(self.config.orchard.seed),
            k.tracker.config(),
            k.cluster(),
            k.triangulation.config(),
            noise_seeds=k.noise_seeds or None,
            max_workers=self.threads,
        )
        return {k_: summary[k_] for k_ in ("estimated_count", "ground_truth_visible_count")}

    def report(self) -> dict:
        return {"artifacts": SummarizeReportsUseCase(self.writer).execute()["artifacts"]}

    def run(self, command: str, scene: Optional[Path]) -> dict:
        if command in ("sweep", "report"):
            return getattr(self, command)()
        return getattr(self, command)(scene)


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    configure_logging()
    args = build_parser().parse_args(argv)

    observability: Optional[IObservabilityHandler] = None
    try:
        config = load_config(args.config, args.seed_override)
        out_dir = args.out if args.out is not None else Path(config.output.directory)
        observability = _observability()
        runner = CommandRunner(config, out_dir, args.threads, observability)
        result = runner.run(args.command, getattr(args, "scene", None))
    except (ConfigError, ValidationError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except CanopySimError as exc:
        logger.error("command failed command=%s error=%s", args.command, exc)
        return _fail(EXIT_RUNTIME, exc)
    except Exception as exc:  # noqa: BLE001
        logger.exception("unexpected failure command=%s", args.command)
        return _fail(EXIT_RUNTIME, exc)
    finally:
        if observability is not None:
            observability.flush()

    print(" ".join(f"{k}={json.dumps(v)}" for k, v in result.items()))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
