"""Counter-based random substreams for reproducible parallel Monte Carlo.

Every replica draws from its own Philox stream keyed by the master seed plus
a small integer path (experiment tag, replica index, ...). Streams depend only
on the key, never on scheduling, so results are bit-identical for any worker
count. Philox is counter-based: independent keys give independent streams
without coordination.
"""

from __future__ import annotations

import numpy as np

# experiment tags, part of the stream key; never reorder or reuse
TAG_FIELD = 0
TAG_COLLISION = 1
TAG_GAPFIT = 2
TAG_CAPACITY = 3
TAG_BOXDIM = 4
TAG_SMALLTIME = 5
TAG_GEOMETRY = 6
TAG_ORACLE = 7


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream addressed by (master_seed, *path).

    Same arguments always give a bit-identical stream, regardless of how many
    other substreams exist or in which order they are created.
    """
    key = np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(key))
