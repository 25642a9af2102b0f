"""Digit-restriction sets: deterministic fractals adapted to the dyadic tree.

``K`` is the set of x in [0, 1] whose binary expansion, cut into consecutive
blocks of ``block`` bits, only uses allowed words.  Its Hausdorff dimension
is ``log2(len(allowed)) / block``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np


@dataclass(frozen=True, order=True)
class DyadicIndex:
    """The dyadic cell ``[index * 2**-level, (index + 1) * 2**-level]``."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.index < (1 << self.level):
            raise ValueError(f"invalid dyadic index ({self.level}, {self.index})")

    def parent(self) -> "DyadicIndex":
        if self.level == 0:
            raise ValueError("the root cell has no parent")
        return DyadicIndex(self.level - 1, self.index >> 1)

    def children(self) -> tuple["DyadicIndex", "DyadicIndex"]:
        return DyadicIndex(self.level + 1, 2 * self.index), DyadicIndex(self.level + 1, 2 * self.index + 1)

    def ancestor(self, level: int) -> "DyadicIndex":
        if not 0 <= level <= self.level:
            raise ValueError("ancestor level out of range")
        return DyadicIndex(level, self.index >> (self.level - level))

    @property
    def left(self) -> float:
        return self.index / (1 << self.level)

    @property
    def right(self) -> float:
        return (self.index + 1) / (1 << self.level)


def _parse_word(word, block):
    if isinstance(word, str):
        if len(word) != block or set(word) - {"0", "1"}:
            raise ValueError(f"word {word!r} is not a binary word of length {block}")
        return int(word, 2)
    word = int(word)
    if not 0 <= word < (1 << block):
        raise ValueError(f"word {word} does not fit in {block} bits")
    return word


@dataclass(frozen=True)
class DigitRestrictionSet:
    block: int
    allowed: tuple

    def __post_init__(self):
        if self.block < 1:
            raise ValueError("block length must be >= 1")
        words = sorted({_parse_word(w, self.block) for w in self.allowed})
        if not words:
            raise ValueError("allowed word set must be nonempty")
        object.__setattr__(self, "allowed", tuple(words))

    @classmethod
    def full(cls) -> "DigitRestrictionSet":
        return cls(1, ("0", "1"))

    @classmethod
    def point(cls) -> "DigitRestrictionSet":
        """The single point {0}."""
        return cls(1, ("0",))

    @property
    def words(self) -> list[str]:
        return [format(w, f"0{self.block}b") for w in self.allowed]

    def prefix_table(self, r: int) -> np.ndarray:
        """Boolean table over r-bit words: is it a prefix of an allowed word?"""
        table = np.zeros(1 << r, dtype=bool)
        table[[w >> (self.block - r) for w in self.allowed]] = True
        return table

    def spec(self) -> str:
        return f"set=digits b={self.block} allow={','.join(self.words)}"

    def __str__(self):
        return self.spec()


def zeta0(dset: DigitRestrictionSet) -> float:
    """Euclidean Hausdorff dimension ``log2|A| / b``."""
    return math.log2(len(dset.allowed)) / dset.block


def cover(dset: DigitRestrictionSet, n: int) -> np.ndarray:
    """Indices of the level-n cells whose binary prefix is extendable in K.

    Returned sorted increasingly as an int64 array.
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    b = dset.block
    tables = [dset.prefix_table(r) for r in range(1, b + 1)]
    idx = np.zeros(1, dtype=np.int64)
    for level in range(n):
        r = level % b + 1
        children = np.empty(2 * idx.size, dtype=np.int64)
        children[0::2] = 2 * idx
        children[1::2] = 2 * idx + 1
        idx = children[tables[r - 1][children & ((1 << r) - 1)]]
    return idx


def iter_cover(dset: DigitRestrictionSet, n: int) -> Iterator[DyadicIndex]:
    for k in cover(dset, n):
        yield DyadicIndex(n, int(k))


def cover_count(dset: DigitRestrictionSet, n: int) -> int:
    """Size of ``cover(dset, n)`` without enumerating it."""
    if n < 0:
        raise ValueError("level must be >= 0")
    full, r = divmod(n, dset.block)
    partial = len({w >> (dset.block - r) for w in dset.allowed}) if r else 1
    return len(dset.allowed) ** full * partial
