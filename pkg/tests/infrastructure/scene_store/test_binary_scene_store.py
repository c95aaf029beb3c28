import json
import struct

import pytest

from src.domain.errors import SceneFormatError, SceneVersionError
from src.infrastructure.scene_store.binary_scene_store import (
    MAGIC,
    BinarySceneStore,
    load_orchard,
    save_orchard,
)
from tests.scenes import make_orchard

PREAMBLE = struct.Struct("<8sII")


@pytest.fixture
def scene_bytes(tiny_orchard, tmp_path) -> bytes:
    path = tmp_path / "orchard.scn"
    save_orchard(tiny_orchard, path)
    return path.read_bytes()


def test_round_trip_preserves_the_model(tiny_orchard, tmp_path) -> None:
    path = tmp_path / "nested" / "orchard.scn"
    save_orchard(tiny_orchard, path)
    loaded = load_orchard(path)
    assert loaded.equals(tiny_orchard)
    assert loaded.fruits_per_tree() == tiny_orchard.fruits_per_tree()
    assert not path.with_name("orchard.scn.tmp").exists()


def test_resaving_a_loaded_scene_is_byte_identical(scene_bytes, tmp_path) -> None:
    store = BinarySceneStore()
    path = tmp_path / "again.scn"
    store.save(store.loads(scene_bytes), path)
    assert path.read_bytes() == scene_bytes


def test_empty_scene_round_trips(tmp_path) -> None:
    empty = make_orchard()
    save_orchard(empty, tmp_path / "empty.scn")
    loaded = load_orchard(tmp_path / "empty.scn")
    assert loaded.total_fruits == 0
    assert len(loaded.triangles) == 0


def test_file_starts_with_magic_and_version(scene_bytes) -> None:
    magic, version, _ = PREAMBLE.unpack_from(scene_bytes)
    assert (magic, version) == (MAGIC, 1)


def test_truncation_reports_the_failing_offset(scene_bytes) -> None:
    with pytest.raises(SceneFormatError) as info:
        BinarySceneStore().loads(scene_bytes[:-5])
    assert not isinstance(info.value, SceneVersionError)
    assert info.value.offset == len(scene_bytes) - 48
    assert f"at byte offset {len(scene_bytes) - 48}" in str(info.value)


def test_truncated_preamble() -> None:
    with pytest.raises(SceneFormatError) as info:
        BinarySceneStore().loads(MAGIC)
    assert info.value.offset == 0


def test_bad_magic(scene_bytes) -> None:
    with pytest.raises(SceneFormatError) as info:
        BinarySceneStore().loads(b"NOTASCN\0" + scene_bytes[8:])
    assert not isinstance(info.value, SceneVersionError)
    assert info.value.offset == 0


def test_unsupported_version(scene_bytes) -> None:
    data = bytearray(scene_bytes)
    struct.pack_into("<I", data, 8, 2)
    with pytest.raises(SceneVersionError) as info:
        BinarySceneStore().loads(bytes(data))
    assert info.value.offset == 8


def test_unknown_header_field(scene_bytes) -> None:
    _, _, header_len = PREAMBLE.unpack_from(scene_bytes)
    header = json.loads(scene_bytes[16 : 16 + header_len])
    header["colour"] = "green"
    new_header = json.dumps(header).encode("utf-8")
    data = PREAMBLE.pack(MAGIC, 1, len(new_header)) + new_header + scene_bytes[16 + header_len :]
    with pytest.raises(SceneVersionError, match="colour"):
        BinarySceneStore().loads(data)


def test_malformed_header(scene_bytes) -> None:
    _, _, header_len = PREAMBLE.unpack_from(scene_bytes)
    data = scene_bytes[:16] + b"{" * header_len + scene_bytes[16 + header_len :]
    with pytest.raises(SceneFormatError) as info:
        BinarySceneStore().loads(data)
    assert info.value.offset == 16


def test_trailing_bytes_are_rejected(scene_bytes) -> None:
    with pytest.raises(SceneVersionError) as info:
        BinarySceneStore().loads(scene_bytes + b"\0\0")
    assert info.value.offset == len(scene_bytes)


@pytest.mark.parametrize(
    "key, value",
    [("n_triangles", -1), ("n_fruits", 2.5), ("n_trees", "3"), ("n_fruits", True), ("n_triangles", None)],
)
def test_header_counts_must_be_non_negative_integers(scene_bytes, key, value) -> None:
    _, _, header_len = PREAMBLE.unpack_from(scene_bytes)
    header = json.loads(scene_bytes[16 : 16 + header_len])
    header[key] = value
    new_header = json.dumps(header).encode("utf-8")
    data = PREAMBLE.pack(MAGIC, 1, len(new_header)) + new_header + scene_bytes[16 + header_len :]
    with pytest.raises(SceneFormatError, match=key) as info:
        BinarySceneStore().loads(data)
    assert not isinstance(info.value, SceneVersionError)
    assert info.value.offset == 16
