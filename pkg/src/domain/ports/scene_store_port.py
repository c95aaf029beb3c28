"""
Port (interface) for orchard scene persistence.
Infrastructure adapters (e.g. BinarySceneStore) must implement this interface.
"""

from abc import ABC, abstractmethod
from pathlib import Path

from src.domain.entities.orchard import OrchardModel


class ISceneStore(ABC):
    @abstractmethod
    def save(self, model: OrchardModel, path: Path) -> None:
        """Persist *model* to *path*, overwriting any existing file."""
        ...

    @abstractmethod
    def load(self, path: Path) -> OrchardModel:
        """Load a model, raising SceneFormatError without returning partial data."""
        ...
