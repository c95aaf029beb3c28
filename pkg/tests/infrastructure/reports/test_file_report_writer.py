import csv
import json
import math

import numpy as np
import pytest

from src.infrastructure.reports.file_report_writer import FileReportWriter, read_pfm, to_jsonable


def test_to_jsonable_converts_numpy_and_non_finite() -> None:
    payload = {1: np.float64(0.5), "a": np.arange(3), "b": (float("nan"), float("inf")), "c": np.int64(4)}
    assert to_jsonable(payload) == {"1": 0.5, "a": [0, 1, 2], "b": [None, None], "c": 4}


def test_json_is_sorted_and_indented(tmp_path) -> None:
    writer = FileReportWriter(tmp_path / "out")
    path = writer.write_json("result", {"b": 1, "a": float("nan")})
    text = (tmp_path / "out" / "result.json").read_text()
    assert path.endswith("result.json")
    assert text == '{\n  "a": null,\n  "b": 1\n}\n'


def test_csv_keeps_full_float_precision(tmp_path) -> None:
    writer = FileReportWriter(tmp_path)
    writer.write_csv("rows", ["name", "value"], [["a", 0.1 + 0.2], ["b", np.float64(1 / 3)], ["c", 7]])
    with (tmp_path / "rows.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["name", "value"]
    assert float(rows[1][1]) == 0.1 + 0.2
    assert float(rows[2][1]) == 1 / 3
    assert rows[3] == ["c", "7"]


def test_jsonl_one_record_per_line(tmp_path) -> None:
    writer = FileReportWriter(tmp_path)
    writer.write_jsonl("trace", ({"step": i, "cost": float(i) / 2} for i in range(3)))
    lines = (tmp_path / "trace.jsonl").read_text().splitlines()
    assert [json.loads(line)["step"] for line in lines] == [0, 1, 2]


def test_depth_round_trips_through_pfm(tmp_path) -> None:
    writer = FileReportWriter(tmp_path)
    depths = np.arange(12, dtype=float).reshape(3, 4) + 0.5
    depths[0, 0] = np.inf
    writer.write_depth("depth", depths)
    raw = (tmp_path / "depth.pfm").read_bytes()
    assert raw.startswith(b"Pf\n4 3\n-1.0\n")
    np.testing.assert_array_equal(read_pfm(tmp_path / "depth.pfm"), depths)


def test_depth_must_be_two_dimensional(tmp_path) -> None:
    with pytest.raises(ValueError):
        FileReportWriter(tmp_path).write_depth("depth", np.zeros(3))


def test_read_json_reports_by_stem(tmp_path) -> None:
    writer = FileReportWriter(tmp_path / "out")
    assert writer.read_json_reports() == {}
    writer.write_json("orchard", {"trees": 2})
    writer.write_json("flight", {"reached": True, "min_clearance_m": math.inf})
    writer.write_text("summary", "ignored\n")
    assert writer.read_json_reports() == {"flight": {"min_clearance_m": None, "reached": True}, "orchard": {"trees": 2}}
