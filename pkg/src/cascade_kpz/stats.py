"""Replicate mean and standard error."""

from __future__ import annotations

import math

import numpy as np


def mean_stderr(values) -> tuple[float, float]:
    """Sample mean and standard error of the mean.

    Both are computed from deviations to the first sample, so identical
    samples give their common value and a standard error of exactly 0.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("need at least one value")
    if not np.all(np.isfinite(v)):
        with np.errstate(invalid="ignore"):
            return float(np.mean(v)), math.nan
    d = v - v[0]
    mean = float(v[0] + np.mean(d))
    if v.size == 1 or not np.any(d):
        return mean, 0.0
    return mean, float(np.std(d, ddof=1) / math.sqrt(v.size))
