"""Lower-bound machinery: Frostman measures, cascade tilts and discrete energies.

A measure nu_0 on K with finite Euclidean t-energy is tilted along the cascade
by ``f_n = prod_{j<n} W_{I_j}^s / a^n`` with ``a = E[W^s]``.  If the tilted
measures keep a bounded s-energy in the (truncated) cascade metric, the
quantum dimension of K is at least s.  Everything here is discretized on the
level-n dyadic cells.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cascade import CascadeRealization, as_seed_array, cover_masses, level_masses, row_fsum
from .fractal_sets import DigitRestrictionSet, cover, zeta0
from .stats import mean_stderr
from .weights import WeightModel, moment, neg_moment, phi

MAX_SUPPORT = 4096
_ROW_BLOCK = 512


class HypothesisWarning(UserWarning):
    """A theorem hypothesis does not hold for the requested parameters."""


@dataclass(frozen=True)
class CellMeasure:
    level: int
    indices: np.ndarray
    masses: np.ndarray
    total: float

    @classmethod
    def from_masses(cls, level, indices, masses) -> "CellMeasure":
        masses = np.asarray(masses, dtype=float)
        return cls(level, np.asarray(indices, dtype=np.int64), masses, math.fsum(masses.tolist()))

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def midpoints(self) -> np.ndarray:
        return (self.indices + 0.5) / float(1 << self.level)


@dataclass(frozen=True)
class TiltParams:
    s: float
    a: float

    @classmethod
    def for_model(cls, model: WeightModel, s: float) -> "TiltParams":
        if not 0 < s < 1:
            raise ValueError("tilt exponent s must lie in (0, 1)")
        return cls(s, moment(model, s))


def frostman_measure(dset: DigitRestrictionSet, n: int) -> CellMeasure:
    """Uniform probability on the level-n cover of K."""
    idx = cover(dset, n)
    return CellMeasure(n, idx, np.full(idx.size, 1.0 / idx.size), 1.0)


def _guard(nu):
    if nu.size > MAX_SUPPORT:
        raise ValueError(f"support has {nu.size} cells; energies are limited to {MAX_SUPPORT}")


def euclid_energy(nu: CellMeasure, t: float, include_diagonal: bool = True) -> float:
    """Discrete t-energy with midpoint distances.

    A cell paired with itself uses the cell width as distance, which
    overestimates the continuum self-interaction.
    """
    if not 0 <= t < 1:
        raise ValueError("t must lie in [0, 1)")
    _guard(nu)
    x = nu.midpoints()
    w = nu.masses
    total = 0.0
    for i in range(0, x.size, _ROW_BLOCK):
        d = np.abs(x[i:i + _ROW_BLOCK, None] - x[None, :])
        k = np.zeros_like(d)
        np.power(d, -t, out=k, where=d > 0)
        total += float(w[i:i + _ROW_BLOCK] @ k @ w)
    if include_diagonal:
        total += float(np.sum(w * w)) * (2.0**-nu.level) ** -t
    return total


def tilt_factors(model: WeightModel, seeds, n: int, indices, params: TiltParams) -> np.ndarray:
    """``f_n`` on the given level-n cells, one row per seed."""
    mu = cover_masses(model, seeds, n, indices)
    # mu * 2**n is the ancestor weight product
    return np.exp(params.s * np.log(mu * float(1 << n)) - n * math.log(params.a))


def tilted_measure(real: CascadeRealization, nu0: CellMeasure, params: TiltParams) -> CellMeasure:
    real._check(nu0.level)
    f = tilt_factors(real.model, real.seed, nu0.level, nu0.indices, params)[0]
    return CellMeasure.from_masses(nu0.level, nu0.indices, nu0.masses * f)


def _energy_from_masses(nu_idx, nu_w, mu_level, s):
    """s-energy of weights ``nu_w`` on cells ``nu_idx`` given all level masses."""
    cum = np.concatenate(([0.0], np.cumsum(mu_level)))
    m = mu_level[nu_idx]
    mid = cum[nu_idx] + 0.5 * m
    total = 0.0
    for i in range(0, nu_idx.size, _ROW_BLOCK):
        rho = np.abs(mid[i:i + _ROW_BLOCK, None] - mid[None, :])
        rho = np.maximum(rho, np.maximum(m[i:i + _ROW_BLOCK, None], m[None, :]))
        total += float(nu_w[i:i + _ROW_BLOCK] @ rho**-s @ nu_w)
    return total


def quantum_energy(real: CascadeRealization, nu: CellMeasure, s: float) -> float:
    """Discrete s-energy of ``nu`` in the truncated cascade metric.

    Distinct cells interact through ``max(rho(mid_I, mid_J), mu_n(I), mu_n(J))``;
    a cell with itself through ``mu_n(I)``.
    """
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    _guard(nu)
    return _energy_from_masses(nu.indices, nu.masses, real.level_masses(nu.level), s)


@dataclass
class LowerBoundReport:
    s: float
    phi_s: float
    zeta0: float
    neg_moment: float
    hypothesis_ok: bool
    rows: list
    ratio: float
    ratio_threshold: float
    bounded: bool
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "phi_s": self.phi_s,
            "zeta0": self.zeta0,
            "neg_moment": self.neg_moment if math.isfinite(self.neg_moment) else "inf",
            "hypothesis_ok": self.hypothesis_ok,
            "ratio": self.ratio,
            "ratio_threshold": self.ratio_threshold,
            "bounded": self.bounded,
            "levels": [r["n"] for r in self.rows],
            "mean_energy": [r["mean_energy"] for r in self.rows],
            "warnings": list(self.warnings),
        }


def energy_samples(model: WeightModel, seeds, dset: DigitRestrictionSet, s: float, n: int) -> np.ndarray:
    """Quantum energies of the tilted Frostman measure, one per seed."""
    seeds = as_seed_array(seeds)
    nu0 = frostman_measure(dset, n)
    _guard(nu0)
    params = TiltParams.for_model(model, s)
    out = np.empty(seeds.size)
    for i in range(0, seeds.size, 64):
        chunk = seeds[i:i + 64]
        mu = level_masses(model, chunk, n)
        f = np.exp(params.s * np.log(mu[:, nu0.indices] * float(1 << n)) - n * math.log(params.a))
        for r in range(chunk.size):
            out[i + r] = _energy_from_masses(nu0.indices, nu0.masses * f[r], mu[r], s)
    return out


def lower_bound_evidence(model: WeightModel, seeds, dset: DigitRestrictionSet, s: float, levels,
                         ratio_threshold: float = 8.0) -> LowerBoundReport:
    """Replicate-mean energies of tilted measures across levels.

    The sequence counts as bounded when the max/min ratio of the mean
    energies over the upper half of ``levels`` stays below
    ``ratio_threshold``.  Hypothesis violations are reported and warned
    about, not raised.
    """
    seeds = as_seed_array(seeds)
    levels = list(levels)
    if not levels:
        raise ValueError("need at least one level")
    z0 = zeta0(dset)
    phi_s = phi(model, s)
    neg = neg_moment(model, s)
    notes = []
    if not phi_s < z0:
        notes.append(f"phi(s) = {phi_s:.6g} is not below zeta0 = {z0:.6g}")
    if not math.isfinite(neg):
        notes.append(f"E[W^-{s}] is infinite")
    for msg in notes:
        warnings.warn(msg, HypothesisWarning, stacklevel=2)
    rows = []
    for n in levels:
        e = energy_samples(model, seeds, dset, s, n)
        mean, se = mean_stderr(e)
        rows.append({"n": n, "s": s, "mean_energy": mean, "stderr": se, "replicates": int(e.size)})
    upper = [r["mean_energy"] for r in rows[len(rows) // 2:]]
    ratio = max(upper) / min(upper)
    return LowerBoundReport(
        s=s, phi_s=phi_s, zeta0=z0, neg_moment=neg, hypothesis_ok=not notes, rows=rows,
        ratio=ratio, ratio_threshold=ratio_threshold, bounded=ratio <= ratio_threshold, warnings=notes,
    )


def tilted_totals(model: WeightModel, seeds, dset: DigitRestrictionSet, s: float, n: int) -> np.ndarray:
    """``nu_n[0, 1]`` of the tilted Frostman measure, one per seed."""
    nu0 = frostman_measure(dset, n)
    params = TiltParams.for_model(model, s)
    seeds = as_seed_array(seeds)
    rows = []
    for i in range(0, seeds.size, 256):
        f = tilt_factors(model, seeds[i:i + 256], n, nu0.indices, params)
        rows.append(row_fsum(f * nu0.masses))
    return np.concatenate(rows)
