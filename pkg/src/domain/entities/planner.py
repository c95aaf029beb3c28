"""
Domain entities for minimum-jerk local planning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from src.domain.entities.camera import CameraConfig
from src.domain.entities.geometry import Vec3, as_vec3
from src.domain.errors import PlanningError


@dataclass(frozen=True, eq=False)
class PolySegment:
    """s(t) = α t⁵/120 + β t⁴/24 + γ t³/6 + a0 t²/2 + v0 t + s0, for t in [0, T]."""

    alpha: Vec3
    beta: Vec3
    gamma: Vec3
    s0: Vec3
    v0: Vec3
    a0: Vec3
    T: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "s0", "v0", "a0"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)))
        if not self.T > 0:
            raise PlanningError(f"segment duration must be > 0, got {self.T!r}")

    def _t(self, t: float | NDArray) -> NDArray[np.float64]:
        return np.asarray(t, dtype=np.float64).reshape(-1, 1)

    def position(self, t: float | NDArray) -> NDArray[np.float64]:
        t = self._t(t)
        out = (
            self.alpha * t**5 / 120.0
            + self.beta * t**4 / 24.0
            + self.gamma * t**3 / 6.0
            + self.a0 * t**2 / 2.0
            + self.v0 * t
            + self.s0
        )
        return out if out.shape[0] > 1 else out[0]

    def velocity(self, t: float | NDArray) -> NDArray[np.float64]:
        t = self._t(t)
        out = (
            self.alpha * t**4 / 24.0
            + self.beta * t**3 / 6.0
            + self.gamma * t**2 / 2.0
            + self.a0 * t
            + self.v0
        )
        return out if out.shape[0] > 1 else out[0]

    def acceleration(self, t: float | NDArray) -> NDArray[np.float64]:
        t = self._t(t)
        out = self.alpha * t**3 / 6.0 + self.beta * t**2 / 2.0 + self.gamma * t + self.a0
        return out if out.shape[0] > 1 else out[0]

    def jerk(self, t: float | NDArray) -> NDArray[np.float64]:
        t = self._t(t)
        out = self.alpha * t**2 / 2.0 + self.beta * t + self.gamma
        return out if out.shape[0] > 1 else out[0]

    def sample_times(self, dt: float) -> NDArray[np.float64]:
        """{0, dt, 2dt, ...} below T, plus T itself."""
        if not dt > 0:
            raise PlanningError(f"dt must be > 0, got {dt!r}")
        times = np.arange(0.0, self.T, dt)
        if times.size == 0 or times[-1] < self.T:
            times = np.append(times, self.T)
        return times

    def coefficients(self) -> dict[str, list[float]]:
        return {
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
            "s0": self.s0.tolist(),
            "v0": self.v0.tolist(),
            "a0": self.a0.tolist(),
            "T": self.T,
        }


@dataclass(frozen=True)
class VehicleLimits:
    v_max: float
    a_max: float
    radius: float

    def __post_init__(self) -> None:
        for name in ("v_max", "a_max", "radius"):
            value = getattr(self, name)
            if not value > 0:
                raise PlanningError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True, eq=False)
class Pyramid:
    """Obstacle-free rectangular pyramid in the frame of *camera*.

    rect = (u0, v0, u1, v1) in integer pixel edges with u0 < u1, v0 < v1; the
    pyramid is the set of points projecting into rect with forward depth in
    (0, d_base]. Points certified by contains() additionally keep *margin*
    metres from every side face.
    """

    camera: CameraConfig
    rect: tuple[int, int, int, int]
    d_base: float
    margin: float

    def __post_init__(self) -> None:
        u0, v0, u1, v1 = self.rect
        if not (u0 < u1 and v0 < v1):
            raise PlanningError(f"pyramid rect must be non-empty, got {self.rect!r}")
        if not self.d_base > 0:
            raise PlanningError(f"d_base must be > 0, got {self.d_base!r}")

    @property
    def apex(self) -> Vec3:
        return self.camera.position

    def _face_slopes(self) -> tuple[float, float, float, float]:
        cam = self.camera
        u0, v0, u1, v1 = self.rect
        y_left = (cam.cx - u0) / cam.fx
        y_right = (cam.cx - u1) / cam.fx
        z_top = (cam.cy - v0) / cam.fy
        z_bottom = (cam.cy - v1) / cam.fy
        return y_left, y_right, z_top, z_bottom

    def contains(self, points: NDArray[np.float64]) -> NDArray[np.bool_]:
        """Vectorised membership test for world points (N, 3)."""
        local = self.camera.to_camera(points)
        x, y, z = local[:, 0], local[:, 1], local[:, 2]
        y_left, y_right, z_top, z_bottom = self._face_slopes()
        inside = (x > 0) & (x <= self.d_base)
        inside &= (y_left * x - y) / np.hypot(1.0, y_left) >= self.margin
        inside &= (y - y_right * x) / np.hypot(1.0, y_right) >= self.margin
        inside &= (z_top * x - z) / np.hypot(1.0, z_top) >= self.margin
        inside &= (z - z_bottom * x) / np.hypot(1.0, z_bottom) >= self.margin
        return inside


@dataclass(frozen=True)
class SamplerConfig:
    n_candidates: int = 100
    duration_range: tuple[float, float] = (0.5, 3.0)
    distance_range: tuple[float, float] = (1.0, 5.0)
    cone_half_angle: float = 0.5
    cost_lambda: float = 1.0
    dt: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_candidates < 1:
            raise PlanningError(f"n_candidates must be >= 1, got {self.n_candidates!r}")
        lo, hi = self.duration_range
        if not 0 < lo <= hi:
            raise PlanningError(f"invalid duration_range {self.duration_range!r}")
        lo, hi = self.distance_range
        if not 0 < lo <= hi:
            raise PlanningError(f"invalid distance_range {self.distance_range!r}")
        if not 0 <= self.cone_half_angle < np.pi / 3:
            raise PlanningError(f"cone_half_angle must lie in [0, pi/3), got {self.cone_half_angle!r}")
        if not self.dt > 0:
            raise PlanningError(f"dt must be > 0, got {self.dt!r}")


@dataclass(frozen=True)
class PlanStepRecord:
    step: int
    time: float
    candidates_evaluated: int
    fallback: bool
    chosen: Optional[dict] = None
    chosen_cost: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "time": self.time,
            "candidates_evaluated": self.candidates_evaluated,
            "fallback": self.fallback,
            "chosen": self.chosen,
            "chosen_cost": self.chosen_cost,
        }


@dataclass(frozen=True, eq=False)
class PlannerState:
    """If a step finds no feasible candidate, segment and segment_start stay unchanged."""

    goal: Vec3
    segment: Optional[PolySegment] = None
    segment_start: float = 0.0
    step: int = 0
    last_step: Optional[PlanStepRecord] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "goal", as_vec3(self.goal))

    def reference(self, now: float) -> tuple[Vec3, Vec3, Vec3]:
        """Position, velocity and acceleration commanded at time *now*.

        Past the end of the segment the vehicle holds the final position at rest.
        """
        if self.segment is None:
            raise PlanningError("planner state has no active segment")
        t = now - self.segment_start
        if t >= self.segment.T:
            return self.segment.position(self.segment.T), np.zeros(3), np.zeros(3)
        t = max(t, 0.0)
        return self.segment.position(t), self.segment.velocity(t), self.segment.acceleration(t)
