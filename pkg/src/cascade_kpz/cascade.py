"""Seeded multiplicative cascades on the dyadic tree.

The weight of the dyadic cell (n, k) is a pure function of ``(seed, n, k)``
(Philox counter mode), so realizations never store the tree.  A level-n cell
carries the mass

    mu_n(I) = 2**-n * prod_{j<n} W_{I_j},

where ``I_j`` is its level-j ancestor and ``I_0 = [0, 1]``.  The unresolved
tail below level n is replaced by its mean, one.

Most functions here are vectorized over an array of seeds (one realization per
row) because Monte Carlo experiments need thousands of realizations; the
:class:`CascadeRealization` class wraps the single-seed case.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .fractal_sets import DyadicIndex
from .rng import TAG_CASCADE, keyed_words
from .weights import WeightModel

DEFAULT_MAX_LEVEL = 24
STREAM_LEVEL = 18
TAIL_BUDGET = 1 << 22  # cells materialized at once in tail mode
_MASK32 = np.uint64(0xFFFFFFFF)


class DepthExceededError(ValueError):
    pass


def as_seed_array(seeds) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    if arr.ndim != 1:
        raise ValueError("seeds must be a scalar or a 1-d sequence")
    return arr


def cell_weights(model: WeightModel, seeds, level: int, indices) -> np.ndarray:
    """Weights ``W_I`` for cells ``(level, indices)``, one row per seed."""
    s = as_seed_array(seeds)[:, None]
    idx = np.asarray(indices, dtype=np.uint64)[None, :]
    words = keyed_words(s, idx & _MASK32, idx >> np.uint64(32), level, TAG_CASCADE)
    return np.ascontiguousarray(model.from_words(*words), dtype=np.float64)


def _dedup_sorted(a):
    if a.size == 0:
        return a
    keep = np.empty(a.size, dtype=bool)
    keep[0] = True
    np.not_equal(a[1:], a[:-1], out=keep[1:])
    return a[keep]


def descend(weight_fn: Callable, start_mass: np.ndarray, start_level: int,
            start_index: int, n: int, indices) -> np.ndarray:
    """Push mass from one cell down to its level-n descendants ``indices``.

    ``weight_fn(level, parents)`` must return a (rows, len(parents)) array.
    Each step computes ``(mass * W) * 0.5`` in exactly this order; the sparse
    and the full-level code paths therefore agree bit for bit.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and np.any(idx[1:] <= idx[:-1]):
        raise ValueError("indices must be strictly increasing")
    if idx.size and (idx[0] >> (n - start_level) != start_index or idx[-1] >> (n - start_level) != start_index):
        raise ValueError("indices are not descendants of the start cell")
    mass = np.asarray(start_mass, dtype=np.float64).reshape(-1, 1)
    parents = np.array([start_index], dtype=np.int64)
    for j in range(start_level, n):
        kids = _dedup_sorted(idx >> (n - j - 1))
        w = weight_fn(j, parents)
        pos = np.searchsorted(parents, kids >> 1)
        mass = (mass * w)[:, pos] * 0.5
        parents = kids
    return mass


def cover_masses(model: WeightModel, seeds, n: int, indices, tail_depth: int = 0) -> np.ndarray:
    """Masses of the level-n cells ``indices`` (sorted), one row per seed.

    With ``tail_depth = m > 0`` each cell mass is multiplied by the depth-m
    total of its own subtree, i.e. the cell mass is read off level ``n + m``.
    """
    seeds = as_seed_array(seeds)
    wf = lambda level, parents: cell_weights(model, seeds, level, parents)  # noqa: E731
    idx = np.asarray(indices, dtype=np.int64)
    if tail_depth == 0:
        return descend(wf, np.ones(seeds.size), 0, 0, n, idx)
    width = 1 << tail_depth
    per = max(1, TAIL_BUDGET // (seeds.size * width))
    out = np.empty((seeds.size, idx.size))
    for i in range(0, idx.size, per):
        blk = idx[i:i + per]
        fine = ((blk[:, None] << tail_depth) + np.arange(width)).ravel()
        m = descend(wf, np.ones(seeds.size), 0, 0, n + tail_depth, fine)
        out[:, i:i + blk.size] = m.reshape(seeds.size, blk.size, width).sum(axis=2)
    return out


def level_masses(model: WeightModel, seeds, n: int) -> np.ndarray:
    """All 2**n level-n masses for each seed."""
    return cover_masses(model, seeds, n, np.arange(1 << n))


def level_totals(model: WeightModel, seeds, levels, tail_depth: int = 0) -> np.ndarray:
    """``ell_{n + tail_depth}`` for each n in ``levels``; shape (seeds, levels).

    One pass down the full tree; the arithmetic matches :func:`descend`.
    """
    seeds = as_seed_array(seeds)
    want = {n + tail_depth: i for i, n in enumerate(levels)}
    out = np.empty((seeds.size, len(want)))
    mass = np.ones((seeds.size, 1))
    for j in range(max(want) + 1):
        if j in want:
            out[:, want[j]] = row_fsum(mass)
        if j == max(want):
            break
        w = cell_weights(model, seeds, j, np.arange(1 << j))
        mass = (mass * w)[:, np.arange(2 << j) >> 1] * 0.5
    return out


def row_fsum(a: np.ndarray) -> np.ndarray:
    """Exactly rounded row sums (order independent, hence reproducible)."""
    return np.array([math.fsum(row) for row in np.atleast_2d(a).tolist()])


def ell_totals(model: WeightModel, seeds, n: int) -> np.ndarray:
    """``ell_n = mu_n[0, 1]`` for each seed."""
    return row_fsum(level_masses(model, seeds, n))


def _dyadic_numerator(x, n: int) -> int:
    fx = Fraction(x)
    k = fx * (1 << n)
    if k.denominator != 1:
        raise ValueError(f"{x!r} is not a dyadic rational of level <= {n}")
    if not 0 <= k <= (1 << n):
        raise ValueError(f"{x!r} lies outside [0, 1]")
    return int(k)


@dataclass(frozen=True)
class CascadeRealization:
    """One realization of the cascade, fixed by ``(model, seed)``."""

    model: WeightModel
    seed: int
    max_level: int = DEFAULT_MAX_LEVEL

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "seed", int(self.seed))

    def _check(self, level):
        if level < 0:
            raise ValueError("level must be >= 0")
        if level > self.max_level:
            raise DepthExceededError(f"level {level} exceeds max_level {self.max_level}")

    def _wf(self, level, parents):
        return cell_weights(self.model, self.seed, level, parents)

    def weights(self, level: int, indices) -> np.ndarray:
        self._check(level)
        return cell_weights(self.model, self.seed, level, indices)[0]

    def cell_weight(self, cell: DyadicIndex) -> float:
        return float(self.weights(cell.level, [cell.index])[0])

    def masses(self, n: int, indices, tail_depth: int = 0) -> np.ndarray:
        self._check(n + tail_depth)
        return cover_masses(self.model, self.seed, n, indices, tail_depth)[0]

    def mass(self, cell: DyadicIndex) -> float:
        return float(self.masses(cell.level, [cell.index])[0])

    def level_masses(self, n: int) -> np.ndarray:
        self._check(n)
        return level_masses(self.model, self.seed, n)[0]

    def level_blocks(self, n: int) -> Iterator[np.ndarray]:
        """Level-n masses in index order, in blocks of at most 2**STREAM_LEVEL."""
        self._check(n)
        if n <= STREAM_LEVEL:
            yield self.level_masses(n)
            return
        top = n - STREAM_LEVEL
        for j in range(1 << top):
            start = DyadicIndex(top, j)
            m0 = self.mass(start)
            lo = j << STREAM_LEVEL
            yield descend(self._wf, [m0], top, j, n, np.arange(lo, lo + (1 << STREAM_LEVEL)))[0]

    def ell_n(self, n: int) -> float:
        return math.fsum(itertools.chain.from_iterable(b.tolist() for b in self.level_blocks(n)))

    def cdf(self, n: int, x) -> float:
        """``F_n(x) = mu_n[0, x]`` for dyadic x of level <= n."""
        self._check(n)
        k = _dyadic_numerator(x, n)
        if k == 0:
            return 0.0
        return math.fsum(self.masses(n, np.arange(k)).tolist())

    def rho(self, n: int, x, y) -> float:
        """Depth-n cascade distance ``mu_n[x, y]``."""
        self._check(n)
        kx, ky = sorted((_dyadic_numerator(x, n), _dyadic_numerator(y, n)))
        if kx == ky:
            return 0.0
        return math.fsum(self.masses(n, np.arange(kx, ky)).tolist())

    def point_cell(self, n: int, x) -> DyadicIndex:
        """``I_n(x)``; a shared endpoint belongs to the cell on its left."""
        k = _dyadic_numerator(x, n)
        return DyadicIndex(n, k - 1 if k > 0 else 0)

    def rho_trunc(self, n: int, x, y) -> float:
        return max(self.rho(n, x, y), self.mass(self.point_cell(n, x)), self.mass(self.point_cell(n, y)))

    def max_atom(self, n: int) -> float:
        return max(float(b.max()) for b in self.level_blocks(n))

    def recursion_check(self, n: int) -> float:
        """``|ell_n - W_root (ell' + ell'') / 2|`` with the half-trees rebuilt independently."""
        if n < 1:
            raise ValueError("recursion_check needs n >= 1")
        self._check(n)
        ell = self.ell_n(n)
        w_root = self.cell_weight(DyadicIndex(0, 0))
        halves = []
        for h in (0, 1):
            lo = h << (n - 1)
            sub = descend(self._wf, [1.0], 1, h, n, np.arange(lo, lo + (1 << (n - 1))))[0]
            # descend() started from unit mass on a half-cell: already rescaled to [0, 1]
            halves.append(math.fsum(sub.tolist()))
        return abs(ell - w_root * (halves[0] + halves[1]) / 2.0)

    def dump_csv(self, path, levels) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["level", "index", "mass"])
            for n in levels:
                if n > 16:
                    raise ValueError("realization dumps are limited to levels <= 16")
                for k, m in enumerate(self.level_masses(n).tolist()):
                    out.writerow([n, k, repr(m)])
