"""Derivation of named sub-stream seeds from one global seed.

Every source of randomness in a pipeline run (data splits, each ensemble
member, the student, shuffles) draws its integer seed from here, so a run
is a pure function of the global seed.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["derive_seed"]


def derive_seed(root: int, *path) -> int:
    """Stable integer seed for the sub-stream named by `path`.

    Path components may be strings (hashed with crc32) or integers.
    """
    key = [int(root)]
    for part in path:
        if isinstance(part, str):
            key.append(zlib.crc32(part.encode()))
        else:
            key.append(int(part))
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])
