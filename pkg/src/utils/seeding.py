"""Seed derivation for independently seeded experiment cells"""
import zlib

import numpy as np


def derive_seed(base: int, *keys) -> int:
    """
    Child seed for ``keys`` under ``base``.

    Each key is reduced to CRC32 of its string form and fed with ``base`` to
    a numpy SeedSequence; the first 32-bit word of its state is the seed.
    The same (base, keys) always gives the same seed, in any process or order.
    """
    entropy = [int(base)] + [zlib.crc32(str(key).encode("utf-8")) for key in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])
