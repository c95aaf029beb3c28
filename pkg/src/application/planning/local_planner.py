"""
Sampling-based local replanning, one step per depth frame.

Candidates are rest-to-rest minimum-jerk segments from the current state to
endpoints drawn in a cone around the goal direction. They are evaluated in
increasing cost T + cost_lambda * |s(T) - goal|; the first one that passes the
limit check and the pyramid collision check becomes the new segment. When none
passes, the previous segment stays active.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from src.application.orchard.rng import substream
from src.application.planning.min_jerk import check_limits, min_jerk_segment
from src.application.planning.pyramids import free_depths, segment_collision_free
from src.domain.entities.depth_image import DepthImage
from src.domain.entities.geometry import Vec3, as_vec3
from src.domain.entities.planner import (
    PlannerState,
    PlanStepRecord,
    PolySegment,
    Pyramid,
    SamplerConfig,
    VehicleLimits,
)

logger = logging.getLogger(__name__)


def _cone_directions(rng: np.random.Generator, axis: Vec3, half_angle: float, n: int) -> NDArray[np.float64]:
    """n unit vectors uniformly distributed on the spherical cap of *half_angle* around *axis*."""
    cos_theta = rng.uniform(math.cos(half_angle), 1.0, size=n)
    sin_theta = np.sqrt(np.maximum(0.0, 1.0 - cos_theta**2))
    phi = rng.uniform(0.0, 2 * math.pi, size=n)
    helper = np.array([0.0, 0.0, 1.0]) if abs(axis[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return (
        cos_theta[:, None] * axis
        + (sin_theta * np.cos(phi))[:, None] * e1
        + (sin_theta * np.sin(phi))[:, None] * e2
    )


def sample_candidates(
    state: PlannerState,
    pos: Vec3,
    vel: Vec3,
    acc: Vec3,
    sampler: SamplerConfig,
) -> list[tuple[float, PolySegment]]:
    """(cost, segment) pairs sorted by cost; deterministic for (sampler.seed, state.step)."""
    rng = substream(sampler.seed, "sampler", state.step)
    to_goal = state.goal - pos
    goal_distance = float(np.linalg.norm(to_goal))
    axis = to_goal / goal_distance if goal_distance > 1e-9 else np.array([1.0, 0.0, 0.0])

    n = sampler.n_candidates
    dirs = _cone_directions(rng, axis, sampler.cone_half_angle, n)
    distances = np.minimum(rng.uniform(*sampler.distance_range, size=n), goal_distance)
    durations = rng.uniform(*sampler.duration_range, size=n)

    zero = np.zeros(3)
    scored = []
    for k in range(n):
        end = pos + distances[k] * dirs[k]
        seg = min_jerk_segment(pos, vel, acc, end, zero, zero, float(durations[k]))
        cost = float(durations[k]) + sampler.cost_lambda * float(np.linalg.norm(end - state.goal))
        scored.append((cost, k, seg))
    scored.sort(key=lambda item: (item[0], item[1]))
    return [(cost, seg) for cost, _, seg in scored]


def plan_step(
    state: PlannerState,
    now: float,
    pos: Vec3,
    vel: Vec3,
    acc: Vec3,
    depth: DepthImage,
    limits: VehicleLimits,
    sampler: SamplerConfig,
) -> PlannerState:
    pos, vel, acc = as_vec3(pos), as_vec3(vel), as_vec3(acc)
    candidates = sample_candidates(state, pos, vel, acc, sampler)
    pyramids: list[Pyramid] = []
    free = free_depths(depth)

    evaluated = 0
    for cost, seg in candidates:
        evaluated += 1
        if not check_limits(seg, limits, sampler.dt):
            continue
        if not segment_collision_free(seg, pyramids, depth, limits, sampler.dt, free):
            continue
        record = PlanStepRecord(
            step=state.step,
            time=now,
            candidates_evaluated=evaluated,
            fallback=False,
            chosen=seg.coefficients(),
            chosen_cost=cost,
        )
        logger.debug("plan step=%d evaluated=%d cost=%.3f", state.step, evaluated, cost)
        return PlannerState(state.goal, seg, now, state.step + 1, record)

    record = PlanStepRecord(step=state.step, time=now, candidates_evaluated=evaluated, fallback=True)
    logger.info("plan fallback step=%d evaluated=%d keeping_previous=%s", state.step, evaluated, state.segment is not None)
    return PlannerState(state.goal, state.segment, state.segment_start, state.step + 1, record)
