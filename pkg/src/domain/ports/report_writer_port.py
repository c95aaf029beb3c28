"""
Port (interface) for experiment artifact writers.
FileReportWriter (infrastructure/reports) writes into an output directory.
"""

from abc import ABC, abstractmethod
from typing import Any, Iterable, Sequence


class IReportWriter(ABC):
    @abstractmethod
    def write_json(self, name: str, payload: Any) -> str:
        """Write *payload* as canonical JSON; returns the written path."""
        ...

    @abstractmethod
    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str: ...

    @abstractmethod
    def write_jsonl(self, name: str, records: Iterable[Any]) -> str: ...

    @abstractmethod
    def write_text(self, name: str, text: str) -> str: ...

    @abstractmethod
    def read_json_reports(self) -> dict[str, Any]:
        """Every JSON artifact already in the output location, keyed by file stem."""
        ...

    @abstractmethod
    def write_depth(self, name: str, depths: Any) -> str:
        """Write a depth array (H, W) as a little-endian float32 PFM file."""
        ...
