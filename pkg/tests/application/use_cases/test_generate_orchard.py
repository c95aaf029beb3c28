from pathlib import Path

from src.application.use_cases.generate_orchard import GenerateOrchardUseCase
from src.domain.entities.orchard import OrchardModel
from src.domain.ports.scene_store_port import ISceneStore
from tests.scenes import TINY_LAYOUT, TINY_PARAMS


class MemorySceneStore(ISceneStore):
    def __init__(self) -> None:
        self.saved: dict[Path, OrchardModel] = {}

    def save(self, model: OrchardModel, path: Path) -> None:
        self.saved[path] = model

    def load(self, path: Path) -> OrchardModel:
        return self.saved[path]


def test_generates_saves_and_summarizes(writer, observability) -> None:
    store = MemorySceneStore()
    use_case = GenerateOrchardUseCase(store, writer, observability)
    model = use_case.execute(TINY_PARAMS, TINY_LAYOUT, seed=7, scene_path=Path("orchard.scn"))

    assert store.saved[Path("orchard.scn")] is model
    summary = writer.json["orchard"]
    assert summary["seed"] == 7
    assert summary["trees"] == 2
    assert summary["triangles"] == len(model.triangles)
    assert summary["total_fruits"] == model.total_fruits
    assert sum(summary["fruits_per_tree"].values()) == model.total_fruits
    assert set(summary["fruits_per_tree"]) == {"0", "1"}
    assert summary["scene"] == "orchard.scn"
    assert [name for name, _ in observability.spans] == ["generate"]
    assert observability.spans[0][1]["total_fruits"] == model.total_fruits


def test_without_scene_path_nothing_is_saved(writer, observability, tiny_orchard) -> None:
    store = MemorySceneStore()
    model = GenerateOrchardUseCase(store, writer, observability).execute(TINY_PARAMS, TINY_LAYOUT, seed=7)
    assert store.saved == {}
    assert writer.json["orchard"]["scene"] is None
    assert model.equals(tiny_orchard)
