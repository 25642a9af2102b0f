"""Exhaustive enumeration of shallow two-point cascades.

With ``W = 1 +/- sigma`` a depth-d cascade has ``2**(2**d - 1)`` equally
likely weight configurations.  Enumerating them gives exact moments that the
Monte Carlo code paths are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..cascade import descend, row_fsum
from ..weights import TwoPoint

MAX_DEPTH = 3


@dataclass(frozen=True)
class OracleMoments:
    depth: int
    s: float
    cell_moments: np.ndarray  # E[mu_d(I)^s] for every level-d cell
    ell_moment: float  # E[ell_d^s]
    ell_neg_moment: float  # E[ell_d^-s]
    outcomes: int


def enumerate_masses(model: TwoPoint, depth: int) -> np.ndarray:
    """Level-``depth`` masses for every weight configuration (one row each)."""
    if not isinstance(model, TwoPoint):
        raise TypeError("enumeration needs a finite two-point law")
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must lie in [0, {MAX_DEPTH}]")
    n_w = (1 << depth) - 1
    outcomes = 1 << n_w
    bits = (np.arange(outcomes)[:, None] >> np.arange(n_w)[None, :]) & 1
    table = np.where(bits == 1, 1.0 + model.sigma, 1.0 - model.sigma)

    def weight_fn(level, parents):
        # weights of level j occupy columns [2**j - 1, 2**(j+1) - 1)
        return table[:, (1 << level) - 1 + np.asarray(parents)]

    return descend(weight_fn, np.ones(outcomes), 0, 0, depth, np.arange(1 << depth))


def enumerate_oracle(model: TwoPoint, depth: int, s: float) -> OracleMoments:
    masses = enumerate_masses(model, depth)
    ell = row_fsum(masses)
    return OracleMoments(
        depth=depth,
        s=s,
        cell_moments=np.array([math.fsum(col) / masses.shape[0] for col in (masses**s).T.tolist()]),
        ell_moment=math.fsum((ell**s).tolist()) / ell.size,
        ell_neg_moment=math.fsum((ell ** (-s)).tolist()) / ell.size,
        outcomes=masses.shape[0],
    )
