"""Counter-based random numbers (Philox4x32-10), vectorized over numpy arrays.

Every draw is a pure function of a 64-bit key and a 128-bit counter, so a
cascade weight can be regenerated at any time from ``(seed, level, index)``
without keeping generator state around.
"""

from __future__ import annotations

import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_SHIFT32 = np.uint64(32)
_ROUNDS = 10

# Domain tags occupy the last counter word so that independent uses of one
# seed never collide.
TAG_CASCADE = 0
TAG_STREAM = 1
TAG_SEEDS = 2

_TWO_NEG52 = 2.0**-52


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 block function.

    All arguments are broadcastable integer arrays holding 32-bit words.
    Returns four ``uint64`` arrays, each holding a 32-bit output word.
    """
    c0, c1, c2, c3, k0, k1 = (
        np.asarray(v, dtype=np.uint64) & _MASK32 for v in (c0, c1, c2, c3, k0, k1)
    )
    c0, c1, c2, c3, k0, k1 = np.broadcast_arrays(c0, c1, c2, c3, k0, k1)
    for r in range(_ROUNDS):
        if r:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT32) ^ c1 ^ k0,
            p1 & _MASK32,
            (p0 >> _SHIFT32) ^ c3 ^ k1,
            p0 & _MASK32,
        )
    return c0, c1, c2, c3


def split_seed(seed):
    """Split 64-bit seeds into (low, high) 32-bit key words."""
    s = np.asarray(seed, dtype=np.uint64)
    return s & _MASK32, s >> _SHIFT32


def bits_to_unit(hi, lo):
    """Map two 32-bit words to a double in the open interval (0, 1).

    The top 52 bits k give ``(k + 0.5) / 2**52``, exact in double precision,
    so neither endpoint is reachable.
    """
    x = (np.asarray(hi, dtype=np.uint64) << _SHIFT32) | np.asarray(lo, dtype=np.uint64)
    return ((x >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_NEG52


def keyed_words(seeds, c0, c1, c2, tag):
    """Philox output for keys ``seeds`` and counters ``(c0, c1, c2, tag)``."""
    k0, k1 = split_seed(seeds)
    return philox4x32(c0, c1, c2, tag, k0, k1)


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """Expand one master seed into ``count`` distinct 64-bit replicate seeds."""
    i = np.arange(count, dtype=np.uint64)
    x0, x1, _, _ = keyed_words(np.uint64(master_seed), i & _MASK32, i >> _SHIFT32, 0, TAG_SEEDS)
    out = ((x0 << _SHIFT32) | x1).tolist()
    if len(set(out)) != count:
        raise RuntimeError("seed expansion produced a duplicate seed")
    return out


class RandomStream:
    """A sequential view on the counter-based generator.

    The stream state is just ``(key, position)``; two streams with equal state
    produce identical draws.
    """

    def __init__(self, key: int, position: int = 0):
        self.key = int(key) & 0xFFFFFFFFFFFFFFFF
        self.position = int(position)

    def words(self, size: int):
        """Next ``size`` Philox blocks as four uint64 word arrays."""
        i = np.arange(self.position, self.position + size, dtype=np.uint64)
        self.position += size
        return keyed_words(np.uint64(self.key), i & _MASK32, i >> _SHIFT32, 0, TAG_STREAM)

    def __repr__(self):
        return f"RandomStream(key={self.key:#x}, position={self.position})"
