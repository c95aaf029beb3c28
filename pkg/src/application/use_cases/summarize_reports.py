"""
Use-case: collect the JSON artifacts of previous commands into one summary.
"""

from typing import Any

from src.domain.ports.report_writer_port import IReportWriter

SUMMARY_NAME = "summary"


class SummarizeReportsUseCase:
    def __init__(self, writer: IReportWriter) -> None:
        self._writer = writer

    def execute(self) -> dict[str, Any]:
        """Write summary.json and a human-readable summary.txt; returns the summary dict."""
        reports = {k: v for k, v in self._writer.read_json_reports().items() if k != SUMMARY_NAME}
        summary: dict[str, Any] = {"artifacts": sorted(reports)}
        lines = [f"artifacts: {', '.join(sorted(reports)) or '(none)'}"]

        if "orchard" in reports:
            o = reports["orchard"]
            summary["orchard"] = {k: o.get(k) for k in ("seed", "trees", "triangles", "total_fruits")}
            lines.append(f"orchard: {o.get('trees')} trees, {o.get('total_fruits')} fruits, seed {o.get('seed')}")

        if "visibility" in reports:
            summary["visibility"] = {
                name: {"n_visible": s["n_visible"], "fraction_visible": s["fraction_visible"]}
                for name, s in reports["visibility"].items()
            }
            ranked = sorted(summary["visibility"].items(), key=lambda kv: -kv[1]["fraction_visible"])
            for name, s in ranked:
                lines.append(f"visibility {name}: {s['n_visible']} visible ({100 * s['fraction_visible']:.1f}%)")

        if "sweep" in reports:
            summary["sweep"] = {
                "best_height": reports["sweep"].get("best_height", {}),
                "interior_maximum": reports["sweep"].get("interior_maximum", {}),
            }
            for mounts, height in summary["sweep"]["best_height"].items():
                lines.append(f"sweep {mounts}: best height {height} m")

        if "flight" in reports:
            f = reports["flight"]
            summary["flight"] = {k: f.get(k) for k in ("reached", "steps", "fallbacks", "min_clearance_m", "contact")}
            lines.append(
                f"flight: reached={f.get('reached')} steps={f.get('steps')} "
                f"fallbacks={f.get('fallbacks')} min_clearance={f.get('min_clearance_m')}"
            )

        if "count" in reports:
            c = reports["count"]
            summary["count"] = {
                "estimated_count": c.get("estimated_count"),
                "ground_truth_visible_count": c.get("ground_truth_visible_count"),
                "confusion": c.get("confusion"),
            }
            lines.append(
                f"count: estimated {c.get('estimated_count')} vs ground truth {c.get('ground_truth_visible_count')}"
            )

        self._writer.write_json(SUMMARY_NAME, summary)
        self._writer.write_text(SUMMARY_NAME, "\n".join(lines) + "\n")
        return summary
