"""Bisection for monotone functions, scalar and lock-step vectorized."""

from __future__ import annotations

import math

import numpy as np


class NoSignChangeError(ValueError):
    def __init__(self, lo, hi, f_lo, f_hi):
        super().__init__(f"no sign change on [{lo}, {hi}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}")
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi


def bisect(f, lo: float, hi: float, tol: float, maxiter: int = 60):
    """Root of a continuous ``f`` with a sign change on ``[lo, hi]``.

    Returns ``(root, iterations)``.  An exact zero at an endpoint or at a
    midpoint is returned as is; otherwise the midpoint of the final bracket.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo, 0
    if f_hi == 0:
        return hi, 0
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChangeError(lo, hi, f_lo, f_hi)
    it = 0
    while hi - lo > tol and it < maxiter:
        it += 1
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid, it
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), it


def bisect_decreasing_many(g, lo: float, hi: np.ndarray, tol: float, maxiter: int = 40):
    """Lock-step bisection of many decreasing functions ``g(s) -> array``.

    ``g`` maps an array of abscissae (one per function) to the function
    values.  Functions must be positive at ``lo`` and nonpositive at ``hi``;
    the caller checks brackets.  Exact zeros are kept exactly.
    """
    hi = np.asarray(hi, dtype=float).copy()
    lo = np.full_like(hi, lo)
    done = np.zeros(hi.shape, dtype=bool)
    root = np.full_like(hi, math.nan)
    n_iter = min(maxiter, max(0, math.ceil(math.log2(float(np.max(hi - lo)) / tol))) if hi.size else 0)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        hit = (val == 0) & ~done
        root[hit] = mid[hit]
        done |= hit
        pos = val > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return np.where(done, root, 0.5 * (lo + hi)), n_iter
