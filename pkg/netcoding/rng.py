"""
Seed handling for reproducible trials.

Every trial owns a generator seeded from (master seed, trial index). The
derivation uses blake2b so it is identical on every platform and does not
depend on Python's randomized ``hash``.
"""

import hashlib
import struct

import numpy as np

from netcoding.errors import UsageError

SEED_MAX = 2 ** 64 - 1

RngHandle = np.random.Generator


def derive_seed(master_seed: int, *indices: int) -> int:
    """Stable 64-bit hash of the master seed and one or more indices"""
    if not 0 <= master_seed <= SEED_MAX:
        raise UsageError(f"seed must lie in [0, 2^64), got {master_seed}")
    digest = hashlib.blake2b(digest_size=8, person=b"netcoding")
    digest.update(struct.pack("<Q", master_seed))
    for index in indices:
        digest.update(struct.pack("<q", int(index)))
    return int.from_bytes(digest.digest(), "little")


def make_rng(seed: int) -> RngHandle:
    return np.random.default_rng(seed)


def trial_rng(master_seed: int, trial_index: int) -> RngHandle:
    return make_rng(derive_seed(master_seed, trial_index))
