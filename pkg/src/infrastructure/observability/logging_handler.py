"""
Infrastructure adapter: stdlib logging → IObservabilityHandler.
The default handler; spans become start/end log lines with elapsed time.
"""

import logging
import time
from contextlib import contextmanager
from typing import Any, Iterator, Optional

from src.domain.ports.observability_port import IObservabilityHandler

logger = logging.getLogger("canopysim.trace")


class LoggingObservabilityHandler(IObservabilityHandler):
    def __init__(self) -> None:
        self.spans: list[tuple[str, dict]] = []

    @contextmanager
    def span(self, name: str, input: Optional[dict] = None) -> Iterator[dict]:
        output: dict = {}
        logger.info("span_start name=%s input=%s", name, input or {})
        started = time.perf_counter()
        try:
            yield output
        except Exception as exc:
            logger.warning("span_error name=%s error=%s", name, type(exc).__name__)
            raise
        finally:
            elapsed = time.perf_counter() - started
            self.spans.append((name, output))
            logger.info("span_end name=%s elapsed_s=%.3f output=%s", name, elapsed, output)

    def event(self, name: str, payload: dict[str, Any]) -> None:
        logger.debug("event name=%s payload=%s", name, payload)

    def flush(self) -> None:
        """Nothing is buffered."""
