"""Dimension estimators.

Euclidean dimension of a digit set comes from exact box counts.  The quantum
dimension (with respect to the cascade metric) is the critical exponent of
the partition function

    Z_n(s) = sum over the level-n cover of mu_n(I)**s,

i.e. the s at which log2 Z_n(s) stops growing with n.  Since
E[Z_n(s)] = 2**(n * (zeta0 - phi(s))) on block-aligned levels, that exponent
targets the solution of zeta0 = phi(zeta).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cascade import CascadeRealization, as_seed_array, cover_masses, level_totals
from .fractal_sets import DigitRestrictionSet, cover, cover_count
from .roots import NoSignChangeError, bisect, bisect_decreasing_many
from .stats import mean_stderr
from .weights import WeightModel, phi

SEED_CHUNK = 64
UPPER_SLACK = 1.05


@dataclass
class DimensionEstimate:
    value: float
    stderr: float
    levels_used: tuple
    fit_r2: float
    method: str
    n_realizations: int = 1
    roots: tuple = ()
    failures: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "levels": list(self.levels_used),
            "r2": self.fit_r2,
            "method": self.method,
            "n_realizations": self.n_realizations,
            "n_failures": len(self.failures),
        }


def linear_fit(x, y):
    """Least-squares slope of ``y`` against ``x`` along the last axis.

    Returns ``(slope, slope_stderr, r2)``; arrays if ``y`` is 2-d.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0:
        raise ValueError("need at least two distinct abscissae")
    yc = y - y.mean(axis=-1, keepdims=True)
    slope = (yc @ xc) / sxx
    resid = yc - slope[..., None] * xc if np.ndim(slope) else yc - slope * xc
    ss_res = np.sum(resid * resid, axis=-1)
    ss_tot = np.sum(yc * yc, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / np.where(ss_tot > 0, ss_tot, 1.0), 1.0)
        dof = x.size - 2
        se = np.sqrt(ss_res / dof / sxx) if dof > 0 else np.zeros_like(ss_res)
    return slope, se, np.clip(r2, 0.0, 1.0)


def aligned_levels(dset: DigitRestrictionSet, n_min: int, n_max: int) -> list[int]:
    return [n for n in range(n_min, n_max + 1) if n % dset.block == 0]


def euclid_dimension(dset: DigitRestrictionSet, n_min: int, n_max: int) -> DimensionEstimate:
    """Box-counting slope of ``log2 cover_count`` against level."""
    if not 0 <= n_min < n_max <= 30:
        raise ValueError("need 0 <= n_min < n_max <= 30")
    levels = aligned_levels(dset, n_min, n_max)
    if len(levels) < 2:
        raise ValueError(f"fewer than 2 block-aligned levels in [{n_min}, {n_max}]")
    counts = [math.log2(cover_count(dset, n)) for n in levels]
    slope, se, r2 = linear_fit(levels, counts)
    return DimensionEstimate(float(slope), float(se), (levels[0], levels[-1]), float(r2), "euclid_boxcount")


def partition_function(real: CascadeRealization, dset: DigitRestrictionSet, s: float, n: int,
                       tail_depth: int = 0) -> float:
    """``Z_n(s)``, summed in index order."""
    m = real.masses(n, cover(dset, n), tail_depth=tail_depth)
    return float(np.sum(np.power(m, s)))


class PartitionProfiles:
    """Cover masses of many realizations on several levels, kept for repeated s-queries.

    With ``normalize=True`` the masses of each level are divided by that
    level's total ``ell_n``, i.e. the partition function of the probability
    measure ``mu_n / ell_n``.
    """

    def __init__(self, model: WeightModel, seeds, dset: DigitRestrictionSet, levels, tail_depth: int = 0,
                 normalize: bool = True, threads: int = 1):
        self.model = model
        self.seeds = as_seed_array(seeds)
        self.dset = dset
        self.levels = list(levels)
        self.tail_depth = tail_depth
        self.normalize = normalize
        chunks = [self.seeds[i:i + SEED_CHUNK] for i in range(0, self.seeds.size, SEED_CHUNK)]
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            parts = list(pool.map(self._chunk_masses, chunks))
        self.masses = [np.ascontiguousarray(np.vstack([p[j] for p in parts])) for j in range(len(self.levels))]

    def _chunk_masses(self, chunk):
        out = [cover_masses(self.model, chunk, n, cover(self.dset, n), self.tail_depth) for n in self.levels]
        if self.normalize:
            totals = level_totals(self.model, chunk, self.levels, self.tail_depth)
            out = [m / totals[:, j:j + 1] for j, m in enumerate(out)]
        return out

    def log2_Z(self, s) -> np.ndarray:
        """(realizations, levels) array; ``s`` scalar or one value per realization."""
        s = np.broadcast_to(np.asarray(s, dtype=float), (self.seeds.size,))[:, None]
        return np.column_stack([np.log2(np.sum(np.power(m, s), axis=1)) for m in self.masses])

    def fit(self, s):
        return linear_fit(self.levels, self.log2_Z(s))

    def slopes(self, s) -> np.ndarray:
        return self.fit(s)[0]


def quantum_dimension(reals, dset: DigitRestrictionSet, n_min: int = 8, n_max: int = 16,
                      tol: float = 1e-3, aggregate: str = "mean_slope",
                      tail_depth: int = 0, on_error: str = "raise", normalize: bool = True,
                      threads: int = 1) -> DimensionEstimate:
    """Critical exponent of the partition function over several realizations.

    ``aggregate="mean_slope"`` bisects the replicate-averaged slope of
    ``log2 Z_n(s)`` against n; its standard error is the dispersion of the
    per-realization slopes at the root divided by the mean slope's
    s-derivative there.  ``aggregate="per_realization"`` finds one root per
    realization and reports their mean and standard error.  Partition sums
    use the normalized measure ``mu_n / ell_n`` unless ``normalize=False``.
    Realizations without a sign change on [0, 1.05] raise
    :class:`NoSignChangeError`, or are dropped and listed in ``failures``
    when ``on_error="skip"``.
    """
    reals = list(reals)
    if not reals:
        raise ValueError("need at least one realization")
    if tol <= 0:
        raise ValueError("tol must be positive")
    model, max_level = reals[0].model, reals[0].max_level
    if any(r.model != model for r in reals):
        raise ValueError("all realizations must share one weight model")
    if n_max + tail_depth > max_level:
        raise ValueError("n_max exceeds the realizations' max_level")
    levels = aligned_levels(dset, n_min, n_max)
    if len(levels) < 2:
        raise ValueError(f"fewer than 2 block-aligned levels in [{n_min}, {n_max}]")
    prof = PartitionProfiles(model, [r.seed for r in reals], dset, levels, tail_depth, normalize, threads)
    return estimate_from_profiles(prof, tol=tol, aggregate=aggregate, on_error=on_error)


def estimate_from_profiles(prof: PartitionProfiles, tol: float = 1e-3, aggregate: str = "mean_slope",
                           on_error: str = "raise") -> DimensionEstimate:
    if aggregate == "mean_slope":
        return _mean_slope_estimate(prof, tol)
    if aggregate == "per_realization":
        return _per_realization_estimate(prof, tol, on_error)
    raise ValueError(f"unknown aggregate mode {aggregate!r}")


def _mean_slope_estimate(prof, tol):
    R = prof.seeds.size
    g = lambda s: float(np.mean(prof.slopes(s)))  # noqa: E731
    hi = 1.0 if g(1.0) <= 0 else UPPER_SLACK
    root, _ = bisect(g, 0.0, hi, tol, maxiter=40)
    slopes, _, r2 = prof.fit(root)
    stderr = 0.0
    if R > 1:
        spread = mean_stderr(slopes)[1]
        h = max(tol, 1e-3)
        deriv = (g(root + h) - g(root - h)) / (2 * h)
        if spread > 0 and deriv != 0:
            stderr = spread / abs(deriv)
    return DimensionEstimate(
        value=float(root),
        stderr=stderr,
        levels_used=(prof.levels[0], prof.levels[-1]),
        fit_r2=float(np.mean(r2)),
        method="quantum_partition",
        n_realizations=R,
    )


def _per_realization_estimate(prof, tol, on_error):
    R = prof.seeds.size
    g = prof.slopes
    slope_lo, slope_hi = g(0.0), g(1.0)
    hi = np.where(slope_hi > 0, UPPER_SLACK, 1.0)
    slope_hi = np.where(slope_hi > 0, g(hi), slope_hi)
    bad = (slope_lo < 0) | (slope_hi > 0)
    failures = [
        NoSignChangeError(0.0, float(hi[i]), float(slope_lo[i]), float(slope_hi[i]))
        for i in np.flatnonzero(bad)
    ]
    if failures and (on_error == "raise" or len(failures) == R):
        raise failures[0]
    ok = ~bad
    roots = np.where(slope_lo == 0, 0.0, np.where(slope_hi == 0, hi, math.nan))
    sub = np.flatnonzero(ok & np.isnan(roots))
    if sub.size:

        def g_sub(s_sub):
            s_all = np.zeros(R)
            s_all[sub] = s_sub
            return g(s_all)[sub]

        roots[sub], _ = bisect_decreasing_many(g_sub, 0.0, hi[sub], tol)
    good = roots[ok]
    value, stderr = mean_stderr(good)
    r2 = prof.fit(np.where(ok, roots, 0.0))[2][ok]
    return DimensionEstimate(
        value=value,
        stderr=stderr,
        levels_used=(prof.levels[0], prof.levels[-1]),
        fit_r2=float(np.mean(r2)),
        method="quantum_partition",
        n_realizations=int(ok.sum()),
        roots=tuple(float(x) for x in good),
        failures=failures,
    )


def partition_rows(prof: PartitionProfiles, s: float):
    """Rows ``(n, s, log2_Z, realization_id)`` for CSV export."""
    table = prof.log2_Z(s)
    for r in range(prof.seeds.size):
        for j, n in enumerate(prof.levels):
            yield n, s, float(table[r, j]), int(prof.seeds[r])


def rho_moment_check(model: WeightModel, seeds, s_values, pairs, depth: int = 14, z: float = 1.96):
    """Monte Carlo ``E[rho(x, y)^s]`` against the bound ``8 |x - y|^phi(s)``.

    ``pairs`` are dyadic ``(x, y)`` of level <= depth.  Each result row
    carries the mean, its standard error, the upper confidence limit and
    whether that limit stays below the bound.
    """
    seeds = as_seed_array(seeds)
    s_values = list(s_values)
    rows = []
    for x, y in pairs:
        kx, ky = sorted(int(Fraction(v) * (1 << depth)) for v in (x, y))
        if kx == ky:
            rho = np.zeros(seeds.size)
        else:
            idx = np.arange(kx, ky)
            rho = np.concatenate([
                cover_masses(model, seeds[i:i + SEED_CHUNK], depth, idx).sum(axis=1)
                for i in range(0, seeds.size, SEED_CHUNK)
            ])
        dist = abs(float(Fraction(y)) - float(Fraction(x)))
        for s in s_values:
            vals = rho**s
            mean, se = mean_stderr(vals)
            bound = 8.0 * dist ** phi(model, s) if dist > 0 else 0.0
            upper = mean + z * se
            rows.append({
                "x": float(Fraction(x)), "y": float(Fraction(y)), "s": s,
                "mean": mean, "stderr": se, "ci_upper": upper, "bound": bound,
                "ok": upper <= bound,
            })
    return rows
