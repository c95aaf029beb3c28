"""
Minimum-jerk segments and sampled input-feasibility checks.
"""

from __future__ import annotations

import numpy as np

from src.domain.entities.geometry import Vec3, as_vec3
from src.domain.entities.planner import PolySegment, VehicleLimits
from src.domain.errors import PlanningError


def min_jerk_segment(
    s0: Vec3,
    v0: Vec3,
    a0: Vec3,
    sT: Vec3,
    vT: Vec3,
    aT: Vec3,
    T: float,
) -> PolySegment:
    """Closed-form solution of the per-axis boundary-value problem for (α, β, γ)."""
    if not T > 0:
        raise PlanningError(f"segment duration must be > 0, got {T!r}")
    s0, v0, a0 = as_vec3(s0), as_vec3(v0), as_vec3(a0)
    sT, vT, aT = as_vec3(sT), as_vec3(vT), as_vec3(aT)
    dp = sT - (s0 + v0 * T + a0 * T**2 / 2.0)
    dv = vT - (v0 + a0 * T)
    da = aT - a0
    m = np.array(
        [
            [720.0, -360.0 * T, 60.0 * T**2],
            [-360.0 * T, 168.0 * T**2, -24.0 * T**3],
            [60.0 * T**2, -24.0 * T**3, 3.0 * T**4],
        ]
    )
    alpha, beta, gamma = (m @ np.stack([dp, dv, da])) / T**5
    return PolySegment(alpha, beta, gamma, s0, v0, a0, float(T))


def check_limits(seg: PolySegment, limits: VehicleLimits, dt: float) -> bool:
    """True iff speed and acceleration norms stay within limits at every sample time."""
    t = seg.sample_times(dt)
    speed = np.linalg.norm(np.atleast_2d(seg.velocity(t)), axis=1)
    accel = np.linalg.norm(np.atleast_2d(seg.acceleration(t)), axis=1)
    return bool(np.all(speed <= limits.v_max) and np.all(accel <= limits.a_max))
