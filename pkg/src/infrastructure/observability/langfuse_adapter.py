"""
Infrastructure adapter: Langfuse → IObservabilityHandler.

Langfuse is imported lazily inside the methods so the module can be loaded
even when LANGFUSE_* environment variables are not set (e.g. during testing).
The CLI selects this handler only when LANGFUSE_PUBLIC_KEY and
LANGFUSE_SECRET_KEY are present after .env loading.
"""

import os
from contextlib import contextmanager
from typing import Any, Iterator, Optional

from src.domain.ports.observability_port import IObservabilityHandler

REQUIRED_ENV = ("LANGFUSE_PUBLIC_KEY", "LANGFUSE_SECRET_KEY")


def langfuse_configured() -> bool:
    return all(os.environ.get(name) for name in REQUIRED_ENV)


class LangfuseObservabilityHandler(IObservabilityHandler):
    """Records spans and events on the Langfuse client singleton."""

    def __init__(self) -> None:
        from langfuse import get_client
        self._client = get_client()

    @contextmanager
    def span(self, name: str, input: Optional[dict] = None) -> Iterator[dict]:
        output: dict = {}
        with self._client.start_as_current_span(name=name, input=input) as span:
            yield output
            span.update(output=output)

    def event(self, name: str, payload: dict[str, Any]) -> None:
        with self._client.start_as_current_span(name=name, input=payload):
            pass

    def flush(self) -> None:
        """Flush pending traces to the Langfuse backend before the process exits."""
        self._client.flush()
