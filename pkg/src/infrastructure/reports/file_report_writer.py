"""
Infrastructure adapter: output directory → IReportWriter.

JSON is written with sorted keys and two-space indentation; numpy scalars and
arrays are converted to plain Python values and non-finite floats become null.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from src.domain.ports.report_writer_port import IReportWriter

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _csv_cell(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return value


class FileReportWriter(IReportWriter):
    def __init__(self, out_dir: Path) -> None:
        self.out_dir = Path(out_dir)

    def _path(self, name: str, suffix: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / f"{name}{suffix}"

    def write_json(self, name: str, payload: Any) -> str:
        path = self._path(name, ".json")
        path.write_text(json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n")
        logger.info("artifact written path=%s", path)
        return str(path)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        path = self._path(name, ".csv")
        with path.open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(header)
            n = 0
            for row in rows:
                out.writerow([_csv_cell(c) for c in row])
                n += 1
        logger.info("artifact written path=%s rows=%d", path, n)
        return str(path)

    def write_jsonl(self, name: str, records: Iterable[Any]) -> str:
        path = self._path(name, ".jsonl")
        with path.open("w") as fh:
            for record in records:
                fh.write(json.dumps(to_jsonable(record), sort_keys=True, allow_nan=False) + "\n")
        logger.info("artifact written path=%s", path)
        return str(path)

    def write_text(self, name: str, text: str) -> str:
        path = self._path(name, ".txt")
        path.write_text(text)
        return str(path)

    def write_depth(self, name: str, depths: Any) -> str:
        """PFM greyscale: "Pf", dimensions, scale -1.0 (little-endian), rows bottom to top."""
        arr = np.asarray(depths, dtype="<f4")
        if arr.ndim != 2:
            raise ValueError(f"depth array must be 2-D, got shape {arr.shape!r}")
        height, width = arr.shape
        path = self._path(name, ".pfm")
        with path.open("wb") as fh:
            fh.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
            fh.write(np.ascontiguousarray(np.flipud(arr)).tobytes())
        logger.info("artifact written path=%s size=%dx%d", path, width, height)
        return str(path)

    def read_json_reports(self) -> dict[str, Any]:
        if not self.out_dir.is_dir():
            return {}
        return {p.stem: json.loads(p.read_text()) for p in sorted(self.out_dir.glob("*.json"))}


def read_pfm(path: Path) -> np.ndarray:
    """Inverse of FileReportWriter.write_depth for little- or big-endian greyscale PFM."""
    data = Path(path).read_bytes()
    lines = data.split(b"\n", 3)
    if lines[0].strip() != b"Pf":
        raise ValueError("not a greyscale PFM file")
    width, height = (int(x) for x in lines[1].split())
    scale = float(lines[2])
    dtype = "<f4" if scale < 0 else ">f4"
    arr = np.frombuffer(lines[3], dtype=dtype, count=width * height).reshape(height, width)
    return np.flipud(arr).astype(np.float64)
