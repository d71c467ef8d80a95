"""Sub-seed derivation.

Every random stage draws its generator from ``derive_seed(seed, stage, index)``
so that any stage of the pipeline can be rerun on its own and still see the
same stream it saw inside the full run.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *keys: object) -> int:
    """Hash a root seed plus stage keys into a non-negative 63-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for key in keys:
        h.update(b"\x1f")
        h.update(str(key).encode())
    return int.from_bytes(h.digest(), "big") >> 1


def rng_for(seed: int, *keys: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
