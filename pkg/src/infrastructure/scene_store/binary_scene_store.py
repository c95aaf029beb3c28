"""
Infrastructure adapter: versioned binary scene file → ISceneStore.

Byte layout (all integers and arrays little-endian):

    offset 0   8 bytes   magic b"ORCHSCN\\0"
    offset 8   u32       format version (1)
    offset 12  u32       header length H in bytes
    offset 16  H bytes   UTF-8 JSON header:
                         {"params", "layout", "seed", "n_triangles", "n_fruits", "n_trees"}
    then, back to back:
        f64[n_triangles, 3, 3]  vertices
        u8 [n_triangles]        kinds
        i32[n_triangles]        tree_ids
        i32[n_triangles]        fruit_ids (-1 for non-fruit)
        i32[n_fruits]           fruit tree ids
        i32[n_fruits]           fruit ids
        f64[n_fruits, 3]        fruit centres
        f64[n_fruits]           fruit radii
        f64[n_trees, 3]         tree base positions
        f64[2, 3]               bounds (min, max)

Anything after the last array is rejected.
"""

import json
import logging
import os
import struct
from pathlib import Path
from typing import Any

import numpy as np

from src.domain.entities.geometry import Aabb, TriangleSoup
from src.domain.entities.orchard import FruitRecord, OrchardLayout, OrchardModel, TreeParams
from src.domain.errors import SceneFormatError, SceneVersionError
from src.domain.ports.scene_store_port import ISceneStore

logger = logging.getLogger(__name__)

MAGIC = b"ORCHSCN\0"
FORMAT_VERSION = 1
HEADER_KEYS = frozenset({"params", "layout", "seed", "n_triangles", "n_fruits", "n_trees"})
_PREAMBLE = struct.Struct("<8sII")


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, n_bytes: int, what: str) -> bytes:
        if self.offset + n_bytes > len(self.data):
            raise SceneFormatError(f"truncated scene file while reading {what}", self.offset)
        chunk = self.data[self.offset : self.offset + n_bytes]
        self.offset += n_bytes
        return chunk

    def array(self, dtype: str, shape: tuple[int, ...], what: str) -> np.ndarray:
        dt = np.dtype(dtype)
        count = int(np.prod(shape)) if shape else 1
        raw = self.take(count * dt.itemsize, what)
        return np.frombuffer(raw, dtype=dt).reshape(shape).copy()


class BinarySceneStore(ISceneStore):
    def save(self, model: OrchardModel, path: Path) -> None:
        path = Path(path)
        header = {
            "params": model.params.to_dict(),
            "layout": model.layout.to_dict(),
            "seed": int(model.seed),
            "n_triangles": len(model.triangles),
            "n_fruits": model.total_fruits,
            "n_trees": int(model.tree_bases.shape[0]),
        }
        header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
        soup = model.triangles
        fruits = model.fruits
        parts = [
            _PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header_bytes)),
            header_bytes,
            soup.vertices.astype("<f8").tobytes(),
            soup.kinds.astype("u1").tobytes(),
            soup.tree_ids.astype("<i4").tobytes(),
            soup.fruit_ids.astype("<i4").tobytes(),
            np.array([f.tree_id for f in fruits], dtype="<i4").tobytes(),
            np.array([f.fruit_id for f in fruits], dtype="<i4").tobytes(),
            model.fruit_centers.astype("<f8").tobytes(),
            model.fruit_radii.astype("<f8").tobytes(),
            model.tree_bases.astype("<f8").tobytes(),
            np.stack([model.bounds.min, model.bounds.max]).astype("<f8").tobytes(),
        ]
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(b"".join(parts))
        os.replace(tmp, path)
        logger.info("scene saved path=%s triangles=%d fruits=%d", path, len(soup), len(fruits))

    def load(self, path: Path) -> OrchardModel:
        return self.loads(Path(path).read_bytes())

    def loads(self, data: bytes) -> OrchardModel:
        """Parse a scene from memory; never returns a partially built model."""
        r = _Reader(data)
        magic, version, header_len = _PREAMBLE.unpack(r.take(_PREAMBLE.size, "preamble"))
        if magic != MAGIC:
            raise SceneFormatError(f"bad magic {magic!r}", 0)
        if version != FORMAT_VERSION:
            raise SceneVersionError(f"unsupported scene format version {version}", 8)

        header_offset = r.offset
        try:
            header: dict[str, Any] = json.loads(r.take(header_len, "header").decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SceneFormatError(f"malformed JSON header: {exc}", header_offset) from exc
        if not isinstance(header, dict):
            raise SceneFormatError("header must be a JSON object", header_offset)
        unknown = set(header) - HEADER_KEYS
        if unknown:
            raise SceneVersionError(f"unknown header fields {sorted(unknown)!r}", header_offset)
        missing = HEADER_KEYS - set(header)
        if missing:
            raise SceneFormatError(f"missing header fields {sorted(missing)!r}", header_offset)

        for key in ("n_triangles", "n_fruits", "n_trees"):
            value = header[key]
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise SceneFormatError(f"{key} must be a non-negative integer, got {value!r}", header_offset)
        n_tri, n_fruit, n_tree = header["n_triangles"], header["n_fruits"], header["n_trees"]
        vertices = r.array("<f8", (n_tri, 3, 3), "vertices")
        kinds = r.array("u1", (n_tri,), "kinds")
        tree_ids = r.array("<i4", (n_tri,), "tree_ids")
        fruit_ids = r.array("<i4", (n_tri,), "fruit_ids")
        fruit_tree = r.array("<i4", (n_fruit,), "fruit tree ids")
        fruit_id = r.array("<i4", (n_fruit,), "fruit ids")
        centers = r.array("<f8", (n_fruit, 3), "fruit centres")
        radii = r.array("<f8", (n_fruit,), "fruit radii")
        bases = r.array("<f8", (n_tree, 3), "tree bases")
        bounds = r.array("<f8", (2, 3), "bounds")
        if r.offset != len(data):
            raise SceneVersionError(f"{len(data) - r.offset} unexpected trailing bytes", r.offset)

        try:
            return OrchardModel(
                params=TreeParams.from_dict(header["params"]),
                layout=OrchardLayout.from_dict(header["layout"]),
                seed=int(header["seed"]),
                triangles=TriangleSoup(vertices, kinds, tree_ids, fruit_ids),
                fruits=tuple(
                    FruitRecord(int(t), int(f), c, float(rad))
                    for t, f, c, rad in zip(fruit_tree, fruit_id, centers, radii)
                ),
                bounds=Aabb(bounds[0], bounds[1]),
                tree_bases=bases,
            )
        except (ValueError, TypeError) as exc:
            raise SceneFormatError(f"inconsistent scene content: {exc}", header_offset) from exc


def save_orchard(model: OrchardModel, path: Path) -> None:
    BinarySceneStore().save(model, path)


def load_orchard(path: Path) -> OrchardModel:
    return BinarySceneStore().load(path)
