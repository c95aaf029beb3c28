import numpy as np
import pytest

from src.application.orchard.generator import generate_orchard
from src.infrastructure.observability.logging_handler import LoggingObservabilityHandler
from tests.scenes import TINY_LAYOUT, TINY_PARAMS, MemoryReportWriter


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tiny_orchard():
    return generate_orchard(TINY_PARAMS, TINY_LAYOUT, seed=7)


@pytest.fixture
def writer() -> MemoryReportWriter:
    return MemoryReportWriter()


@pytest.fixture
def observability() -> LoggingObservabilityHandler:
    return LoggingObservabilityHandler()
