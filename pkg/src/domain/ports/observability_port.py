"""
Port (interface) for observability / tracing handlers.
Infrastructure adapters (LoggingObservabilityHandler, LangfuseObservabilityHandler)
must implement this interface; use cases only ever see IObservabilityHandler.
"""

from abc import ABC, abstractmethod
from contextlib import AbstractContextManager
from typing import Any, Optional


class IObservabilityHandler(ABC):
    @abstractmethod
    def span(self, name: str, input: Optional[dict] = None) -> AbstractContextManager[dict]:
        """Open a timed span; the yielded dict is recorded as the span output on exit."""
        ...

    @abstractmethod
    def event(self, name: str, payload: dict[str, Any]) -> None:
        """Record a point-in-time event inside the current span."""
        ...

    @abstractmethod
    def flush(self) -> None:
        """Push buffered traces to the backend before the process exits."""
        ...
