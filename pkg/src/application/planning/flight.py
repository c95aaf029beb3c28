"""
Closed-loop flight: depth frame -> plan_step -> follow the active segment.

The camera looks from the current position towards the goal. The vehicle tracks
its reference perfectly (no attitude or motor dynamics), so the state at the
next frame is read straight off the active segment.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from src.application.planning.local_planner import plan_step
from src.domain.entities.camera import CameraConfig, camera_rotation
from src.domain.entities.geometry import Vec3, as_vec3
from src.domain.entities.planner import PlannerState, PlanStepRecord, SamplerConfig, VehicleLimits
from src.domain.entities.trajectory import Intrinsics
from src.domain.ports.depth_sensor_port import IDepthSensor

logger = logging.getLogger(__name__)

DEFAULT_DEPTH_RATE = 5.0
DEFAULT_GOAL_TOLERANCE = 0.5
DEFAULT_INTRINSICS = Intrinsics(hfov=math.radians(90.0), vfov=math.radians(70.0), far=15.0, width=64, height=48)
# Cap on the camera pitch towards the goal so sideways flight keeps a sensible view.
MAX_VIEW_PITCH = math.radians(60.0)


@dataclass(frozen=True)
class FlightConfig:
    start: tuple[float, float, float]
    goal: tuple[float, float, float]
    limits: VehicleLimits
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    intrinsics: Intrinsics = DEFAULT_INTRINSICS
    depth_rate: float = DEFAULT_DEPTH_RATE
    max_steps: int = 100
    goal_tolerance: float = DEFAULT_GOAL_TOLERANCE

    def __post_init__(self) -> None:
        if not self.depth_rate > 0:
            raise ValueError(f"depth_rate must be > 0, got {self.depth_rate!r}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps!r}")


@dataclass(frozen=True, eq=False)
class FlightResult:
    reached: bool
    steps: int
    final_position: Vec3
    path: NDArray[np.float64]
    times: NDArray[np.float64]
    records: tuple[PlanStepRecord, ...]

    @property
    def fallbacks(self) -> int:
        return sum(1 for r in self.records if r.fallback)


def look_at_camera(position: Vec3, target: Vec3, intrinsics: Intrinsics) -> CameraConfig:
    delta = target - position
    yaw = math.atan2(delta[1], delta[0])
    pitch = math.atan2(delta[2], math.hypot(delta[0], delta[1]))
    pitch = max(-MAX_VIEW_PITCH, min(MAX_VIEW_PITCH, pitch))
    k = intrinsics
    return CameraConfig(position, camera_rotation(yaw, pitch), k.hfov, k.vfov, k.far, k.width, k.height)


def simulate_flight(sensor: IDepthSensor, config: FlightConfig) -> FlightResult:
    """Fly from config.start towards config.goal, replanning at every depth frame.

    path holds the reference positions sampled every sampler.dt, so it can be
    checked against the mesh for clearance.
    """
    goal = as_vec3(config.goal)
    pos = as_vec3(config.start)
    vel = np.zeros(3)
    acc = np.zeros(3)
    state = PlannerState(goal)
    frame_dt = 1.0 / config.depth_rate
    dt = config.sampler.dt

    now = 0.0
    path = [pos.copy()]
    times = [0.0]
    records: list[PlanStepRecord] = []
    reached = bool(np.linalg.norm(goal - pos) <= config.goal_tolerance)
    steps = 0
    while not reached and steps < config.max_steps:
        camera = look_at_camera(pos, goal, config.intrinsics)
        depth = sensor.capture(camera)
        state = plan_step(state, now, pos, vel, acc, depth, config.limits, config.sampler)
        records.append(state.last_step)
        steps += 1

        n_sub = max(1, math.ceil(frame_dt / dt - 1e-9))
        for k in range(1, n_sub + 1):
            t = now + frame_dt * k / n_sub
            if state.segment is not None:
                pos, vel, acc = state.reference(t)
            path.append(np.array(pos, dtype=np.float64))
            times.append(t)
        now += frame_dt
        reached = bool(np.linalg.norm(goal - pos) <= config.goal_tolerance)

    logger.info(
        "flight finished reached=%s steps=%d fallbacks=%d distance_to_goal=%.3f",
        reached,
        steps,
        sum(1 for r in records if r.fallback),
        float(np.linalg.norm(goal - pos)),
    )
    return FlightResult(
        reached=reached,
        steps=steps,
        final_position=np.array(pos, dtype=np.float64),
        path=np.array(path),
        times=np.array(times),
        records=tuple(records),
    )
