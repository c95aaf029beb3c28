"""
Named, splittable random substreams.

Every random draw in the simulator comes from numpy's PCG64 bit generator seeded
with SeedSequence(entropy=seed, spawn_key=(stream, *index)). The stream ids
below are part of the reproducibility contract and must never be renumbered.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

STREAMS: dict[str, int] = {
    "orchard": 1,
    "tree": 2,
    "jitter": 3,
    "sampler": 4,
    "noise": 5,
}


def _seed_sequence(seed: int, stream: str, index: tuple[int, ...]) -> np.random.SeedSequence:
    try:
        stream_id = STREAMS[stream]
    except KeyError:
        raise ValueError(f"unknown random stream {stream!r}") from None
    return np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=(stream_id, *index))


def substream(seed: int, stream: str, *index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed, stream, index)))


def derive_seed(seed: int, stream: str, *index: int) -> int:
    """A 64-bit child seed, e.g. the per-tree seed of tree *index*."""
    return int(_seed_sequence(seed, stream, index).generate_state(1, dtype=np.uint64)[0])
