"""
Use-case: closed-loop local-planner flight through the orchard mesh.
Depends only on Domain ports and application services; no infrastructure imports.
"""

import numpy as np

from src.application.geometry.bvh import Bvh
from src.application.planning.flight import FlightConfig, FlightResult, look_at_camera, simulate_flight
from src.application.services.depth_render import render_depth
from src.domain.entities.geometry import as_vec3
from src.domain.ports.depth_sensor_port import IDepthSensor
from src.domain.ports.observability_port import IObservabilityHandler
from src.domain.ports.report_writer_port import IReportWriter

# Tolerance below the vehicle radius before a clearance counts as contact.
CONTACT_TOLERANCE = 1e-3


class SimulateFlightUseCase:
    def __init__(
        self,
        sensor: IDepthSensor,
        writer: IReportWriter,
        observability: IObservabilityHandler,
    ) -> None:
        self._sensor = sensor
        self._writer = writer
        self._observability = observability

    def execute(self, config: FlightConfig, bvh: Bvh, write_depth_debug: bool = False) -> dict:
        """Fly config.start → config.goal and report reachability and mesh clearance.

        *bvh* is the scene the sensor renders; it is only used here to measure
        the true clearance of the flown path.
        """
        if write_depth_debug:
            # Rendered directly so the debug frame does not count as a sensor capture.
            camera = look_at_camera(as_vec3(config.start), as_vec3(config.goal), config.intrinsics)
            first = render_depth(camera, bvh)
            self._writer.write_depth("depth_first_frame", first.depths)

        with self._observability.span(
            "fly",
            input={"start": list(config.start), "goal": list(config.goal), "max_steps": config.max_steps},
        ) as out:
            result = simulate_flight(self._sensor, config)
            clearance = bvh.min_distance(result.path)
            min_clearance = float(clearance.min()) if clearance.size else float("inf")
            summary = self._summary(result, config, min_clearance)
            out.update(reached=summary["reached"], fallbacks=summary["fallbacks"], min_clearance=min_clearance)

        for record in result.records:
            self._observability.event("fallback" if record.fallback else "plan_step", record.as_dict())
        self._writer.write_jsonl("planner_trace", (r.as_dict() for r in result.records))
        self._writer.write_json("flight", summary)
        return summary

    @staticmethod
    def _summary(result: FlightResult, config: FlightConfig, min_clearance: float) -> dict:
        steps = np.linalg.norm(np.diff(result.path, axis=0), axis=1) if len(result.path) > 1 else np.zeros(0)
        return {
            "reached": result.reached,
            "steps": result.steps,
            "fallbacks": result.fallbacks,
            "flight_time_s": float(result.times[-1]),
            "path_length_m": float(steps.sum()),
            "final_position": result.final_position.tolist(),
            "distance_to_goal": float(np.linalg.norm(as_vec3(config.goal) - result.final_position)),
            "min_clearance_m": min_clearance,
            "vehicle_radius_m": config.limits.radius,
            "contact": bool(min_clearance < config.limits.radius - CONTACT_TOLERANCE),
        }
