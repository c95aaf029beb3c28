"""
Experiment configuration: one versioned JSON or TOML file validated by pydantic.

Unknown keys are rejected at every level. Every section converts itself into the
domain value objects the use cases take, so a config that validates can always
be run.
"""

from __future__ import annotations

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Literal, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 backport with the same API
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.application.orchard.presets import PRESETS, get_preset
from src.application.orchard.rng import derive_seed
from src.application.services.coverage_paths import MOUNT_SETS, named_mount_set
from src.domain.entities.counting import ClusterConfig, NoiseModel, TrackerConfig, TriangulationConfig
from src.domain.entities.orchard import OrchardLayout, TreeParams
from src.domain.entities.planner import SamplerConfig, VehicleLimits
from src.domain.entities.trajectory import Intrinsics, PathPattern, SweepSpec
from src.domain.errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_VERSION = 1
STRATEGY_NAMES = ("through_canopy", "over_canopy", "ground")

Vec3Field = tuple[float, float, float]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CameraSection(_Section):
    hfov_deg: float = Field(90.0, gt=0, lt=180)
    vfov_deg: float = Field(70.0, gt=0, lt=180)
    far: float = Field(15.0, gt=0)
    width: int = Field(64, ge=1)
    height: int = Field(48, ge=1)

    def intrinsics(self) -> Intrinsics:
        return Intrinsics(math.radians(self.hfov_deg), math.radians(self.vfov_deg), self.far, self.width, self.height)


class OrchardSection(_Section):
    preset: str = "walnut-like"
    seed: int = Field(0, ge=0, lt=2**64)
    overrides: dict[str, Any] = Field(default_factory=dict)
    layout_overrides: dict[str, Any] = Field(default_factory=dict)

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: str) -> str:
        if value not in PRESETS:
            raise ValueError(f"unknown preset {value!r}; known: {sorted(PRESETS)}")
        return value

    def tree_params(self) -> TreeParams:
        base = get_preset(self.preset).params.to_dict()
        return TreeParams.from_dict({**base, **self.overrides})

    def layout(self) -> OrchardLayout:
        base = get_preset(self.preset).layout.to_dict()
        return OrchardLayout.from_dict({**base, **self.layout_overrides})


class VisibilitySection(_Section):
    strategies: tuple[str, ...] = STRATEGY_NAMES
    sample_spacing: float = Field(0.5, gt=0)
    heatmap_bin: float = Field(0.5, gt=0)
    profile_layer: float = Field(0.5, gt=0)
    fruits_occlude: bool = False

    @field_validator("strategies")
    @classmethod
    def _known_strategies(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        unknown = [s for s in value if s not in STRATEGY_NAMES]
        if unknown:
            raise ValueError(f"unknown strategies {unknown!r}; known: {list(STRATEGY_NAMES)}")
        return value


class SweepSection(_Section):
    heights: tuple[float, ...] = tuple(float(h) for h in range(1, 9))
    mount_sets: tuple[str, ...] = ("front", "dual_side")
    seeds: Optional[tuple[int, ...]] = None
    n_seeds: int = Field(3, ge=1)
    pattern: PathPattern = PathPattern.STRAIGHT_ROWS
    sample_spacing: float = Field(0.5, gt=0)

    @field_validator("heights")
    @classmethod
    def _positive_heights(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("heights must not be empty")
        bad = [h for h in value if not (math.isfinite(h) and h > 0)]
        if bad:
            raise ValueError(f"heights must be finite and > 0, got {bad!r}")
        return value

    @field_validator("mount_sets")
    @classmethod
    def _known_mount_sets(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        if not value:
            raise ValueError("mount_sets must not be empty")
        unknown = [m for m in value if m not in MOUNT_SETS]
        if unknown:
            raise ValueError(f"unknown mount sets {unknown!r}; known: {sorted(MOUNT_SETS)}")
        return value

    def spec(self, base_seed: int, intrinsics: Intrinsics) -> SweepSpec:
        seeds = self.seeds or tuple(derive_seed(base_seed, "orchard", i) for i in range(self.n_seeds))
        return SweepSpec(
            heights=self.heights,
            mount_sets=tuple(named_mount_set(m, intrinsics) for m in self.mount_sets),
            seeds=tuple(seeds),
            pattern=self.pattern,
            sample_spacing=self.sample_spacing,
        )


class PlannerSection(_Section):
    v_max: float = Field(2.0, gt=0)
    a_max: float = Field(3.0, gt=0)
    radius: float = Field(0.3, gt=0)
    n_candidates: int = Field(100, ge=1)
    duration_range: tuple[float, float] = (0.5, 3.0)
    distance_range: tuple[float, float] = (1.0, 5.0)
    cone_half_angle_deg: float = Field(30.0, ge=0, lt=60)
    cost_lambda: float = Field(1.0, ge=0)
    dt: float = Field(0.02, gt=0)
    seed: Optional[int] = Field(None, ge=0, lt=2**64)

    def limits(self) -> VehicleLimits:
        return VehicleLimits(self.v_max, self.a_max, self.radius)

    def sampler(self, base_seed: int) -> SamplerConfig:
        return SamplerConfig(
            n_candidates=self.n_candidates,
            duration_range=self.duration_range,
            distance_range=self.distance_range,
            cone_half_angle=math.radians(self.cone_half_angle_deg),
            cost_lambda=self.cost_lambda,
            dt=self.dt,
            seed=self.seed if self.seed is not None else derive_seed(base_seed, "sampler"),
        )


class FlightSection(_Section):
    start: Optional[Vec3Field] = None
    goal: Optional[Vec3Field] = None
    length: float = Field(20.0, gt=0)
    max_steps: int = Field(100, ge=1)
    depth_rate: float = Field(5.0, gt=0)
    goal_tolerance: float = Field(0.5, gt=0)


class NoiseSection(_Section):
    sigma_px: float = Field(0.0, ge=0)
    p_miss: float = Field(0.0, ge=0, le=1)
    fp_rate: float = Field(0.0, ge=0)
    c_lo_true: float = Field(1.0, ge=0, le=1)
    c_hi_fp: float = Field(0.5, ge=0, le=1)
    seed: Optional[int] = Field(None, ge=0, lt=2**64)

    def model(self, base_seed: int) -> NoiseModel:
        seed = self.seed if self.seed is not None else derive_seed(base_seed, "noise")
        return NoiseModel(self.sigma_px, self.p_miss, self.fp_rate, self.c_lo_true, self.c_hi_fp, seed)


class TrackerSection(_Section):
    tau_high: float = Field(0.6, ge=0, le=1)
    tau_low: float = Field(0.1, ge=0, le=1)
    iou_min: float = Field(0.2, gt=0, le=1)
    max_age: int = Field(30, ge=0)
    blend_gain: float = Field(0.8, gt=0, le=1)
    two_stage: bool = True

    def config(self) -> TrackerConfig:
        return TrackerConfig(**self.model_dump())


class TriangulationSection(_Section):
    max_reprojection_error: float = Field(3.0, gt=0)
    min_baseline: float = Field(0.05, ge=0)
    min_parallax_deg: float = Field(1.0, ge=0, lt=90)

    def config(self) -> TriangulationConfig:
        return TriangulationConfig(
            self.max_reprojection_error, self.min_baseline, math.radians(self.min_parallax_deg)
        )


def _counting_camera() -> CameraSection:
    return CameraSection(hfov_deg=60.0, vfov_deg=45.0, far=15.0, width=640, height=480)


class CountingSection(_Section):
    tree_id: int = Field(0, ge=0)
    orbit_radius: Optional[float] = Field(None, gt=0)
    orbit_height: Optional[float] = Field(None, gt=0)
    arc_deg: float = Field(60.0, gt=0, le=360)
    sample_spacing: float = Field(0.05, gt=0)
    camera: CameraSection = Field(default_factory=_counting_camera)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    noise_seeds: tuple[int, ...] = ()
    tracker: TrackerSection = Field(default_factory=TrackerSection)
    eps: Optional[float] = Field(None, gt=0)
    min_pts: int = Field(1, ge=1)
    triangulation: TriangulationSection = Field(default_factory=TriangulationSection)

    def cluster(self) -> ClusterConfig:
        return ClusterConfig(self.eps, self.min_pts)


class OutputSection(_Section):
    directory: str = "out"
    write_depth_debug: bool = False


class ExperimentConfig(_Section):
    version: Literal[1] = CONFIG_VERSION
    orchard: OrchardSection = Field(default_factory=OrchardSection)
    camera: CameraSection = Field(default_factory=CameraSection)
    visibility: VisibilitySection = Field(default_factory=VisibilitySection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    planner: PlannerSection = Field(default_factory=PlannerSection)
    flight: FlightSection = Field(default_factory=FlightSection)
    counting: CountingSection = Field(default_factory=CountingSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _domain_objects_build(self) -> "ExperimentConfig":
        # Domain constructors raise ValueError; pydantic reports them as validation errors.
        self.orchard.tree_params()
        self.orchard.layout()
        self.camera.intrinsics()
        self.counting.camera.intrinsics()
        self.sweep.spec(self.orchard.seed, self.camera.intrinsics())
        self.planner.limits()
        self.planner.sampler(self.orchard.seed)
        self.counting.noise.model(self.orchard.seed)
        self.counting.tracker.config()
        self.counting.triangulation.config()
        self.counting.cluster()
        return self


def _read_mapping(path: Path) -> dict[str, Any]:
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        return tomllib.loads(text)
    return json.loads(text)


def load_config(path: Optional[Path] = None, seed_override: Optional[int] = None) -> ExperimentConfig:
    """Read and validate an experiment config; defaults only when *path* is None.

    Raises:
        ConfigError: on unreadable files, syntax errors and validation failures.
    """
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            data = _read_mapping(path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {str(path)!r}: {exc}") from exc
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse config {str(path)!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {str(path)!r} must contain an object at the top level")
    if seed_override is not None:
        orchard = dict(data.get("orchard") or {})
        orchard["seed"] = seed_override
        data = {**data, "orchard": orchard}
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    logger.info("config loaded path=%s preset=%s seed=%d", path, config.orchard.preset, config.orchard.seed)
    return config
