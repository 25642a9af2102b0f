"""Weight laws W for multiplicative cascades.

A weight law is a positive random variable with mean one.  Three families are
built in: log-normal ``W = exp(sigma*Y - sigma2/2)``, the symmetric two-point
law ``W = 1 +/- sigma`` and a finite empirical table.  Moments use closed forms
(or exact finite sums); quadrature is only kept as an independent check.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import RandomStream, bits_to_unit

LN2 = math.log(2.0)
LN4 = math.log(4.0)
MEAN_TOL = 1e-9


class UndefinedMomentError(ValueError):
    """Raised when E[W^s] does not exist for the requested exponent."""


class InvalidModelError(ValueError):
    """Raised when a weight law fails the standing cascade assumptions."""


def _finite_moment(values, probs, s):
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if np.any(values < 0):
        raise UndefinedMomentError("weight law has negative values")
    if s == 0:
        return math.fsum(probs)
    if s < 0 and np.any((values == 0) & (probs > 0)):
        raise UndefinedMomentError(f"E[W^{s}] undefined: W has an atom at 0")
    live = probs > 0
    return math.fsum(probs[live] * values[live] ** s)


def _xlog2x(x):
    return 0.0 if x == 0 else x * math.log2(x)


class WeightModel:
    """Common interface of the weight families."""

    family = "abstract"

    def moment(self, s: float) -> float:
        raise NotImplementedError

    def neg_moment(self, s: float) -> float:
        """E[W^-s] for s >= 0; ``math.inf`` when it diverges."""
        if s < 0:
            raise ValueError("neg_moment expects s >= 0")
        if s == 0:
            return 1.0
        try:
            return self.moment(-s)
        except UndefinedMomentError:
            return math.inf

    def mean(self) -> float:
        return self.moment(1.0)

    def mean_wlog2w(self) -> float:
        raise NotImplementedError

    def is_positive(self) -> bool:
        raise NotImplementedError

    def from_words(self, x0, x1, x2, x3):
        """Transform Philox output words into weight samples."""
        raise NotImplementedError

    def spec(self) -> str:
        """Config text that reconstructs the model."""
        raise NotImplementedError


@dataclass(frozen=True)
class LogNormal(WeightModel):
    """``W = exp(sigma*Y - sigma2/2)`` with Y standard normal."""

    sigma2: float
    family = "lognormal"

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be a positive finite number, got {self.sigma2}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def moment(self, s):
        return math.exp(0.5 * self.sigma2 * s * (s - 1.0))

    def mean(self):
        return 1.0

    def mean_wlog2w(self):
        # E[W ln W] = sigma2/2 under the size-biased (tilted) Gaussian
        return self.sigma2 / (2.0 * LN2)

    def is_positive(self):
        return True

    def from_words(self, x0, x1, x2, x3):
        u1 = bits_to_unit(x0, x1)
        u2 = bits_to_unit(x2, x3)
        y = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        return np.exp(self.sigma * y - 0.5 * self.sigma2)

    def spec(self):
        return f"family=lognormal sigma2={self.sigma2!r}"


@dataclass(frozen=True)
class TwoPoint(WeightModel):
    """``W = 1 - sigma`` or ``1 + sigma`` with probability 1/2 each."""

    sigma: float
    family = "twopoint"

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")

    def moment(self, s):
        lo, hi = 1.0 - self.sigma, 1.0 + self.sigma
        if lo > 0:
            return 0.5 * (lo**s + hi**s)
        return _finite_moment([lo, hi], [0.5, 0.5], s)

    def mean(self):
        return 1.0

    def mean_wlog2w(self):
        if self.sigma > 1:
            raise ValueError("E[W log2 W] is undefined when W can be negative")
        return 0.5 * (_xlog2x(1.0 - self.sigma) + _xlog2x(1.0 + self.sigma))

    def is_positive(self):
        return self.sigma < 1

    def from_words(self, x0, x1, x2, x3):
        up = (np.asarray(x0) >> np.uint64(31)).astype(bool)
        return np.where(up, 1.0 + self.sigma, 1.0 - self.sigma)

    def spec(self):
        return f"family=twopoint sigma={self.sigma!r}"


@dataclass(frozen=True)
class Empirical(WeightModel):
    """A finite law: ``P(W = values[i]) = probs[i]``."""

    values: tuple
    probs: tuple
    family = "empirical"
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if len(values) != len(probs) or not values:
            raise ValueError("values and probs must be nonempty and of equal length")
        if any(p < 0 or not math.isfinite(p) for p in probs):
            raise ValueError("probabilities must be finite and nonnegative")
        if any(not math.isfinite(v) for v in values):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        cdf = np.cumsum(probs) / math.fsum(probs)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def from_csv(cls, path) -> "Empirical":
        values, probs = [], []
        with open(Path(path), newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    v, p = float(row[0]), float(row[1])
                except ValueError:
                    continue  # header row
                values.append(v)
                probs.append(p)
        return cls(tuple(values), tuple(probs))

    def moment(self, s):
        return _finite_moment(self.values, self.probs, s)

    def mean_wlog2w(self):
        return math.fsum(p * _xlog2x(v) for v, p in zip(self.values, self.probs) if p > 0)

    def is_positive(self):
        return all(v > 0 for v, p in zip(self.values, self.probs) if p > 0)

    def from_words(self, x0, x1, x2, x3):
        u = bits_to_unit(x0, x1)
        idx = np.searchsorted(self._cdf, u, side="right")
        return np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]

    def spec(self):
        vals = ",".join(repr(v) for v in self.values)
        probs = ",".join(repr(p) for p in self.probs)
        return f"family=empirical values={vals} probs={probs}"


@dataclass(frozen=True)
class MomentReport:
    s: float
    m: float
    phi: float
    neg_m: float


@dataclass
class ValidationReport:
    family: str
    mean: float
    mean_ok: bool
    positive: bool
    mean_wlog2w: float
    wlog2w_ok: bool
    messages: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.mean_ok and self.positive and self.wlog2w_ok

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "valid": self.valid,
            "mean": self.mean,
            "mean_ok": self.mean_ok,
            "positive": self.positive,
            "mean_wlog2w": self.mean_wlog2w,
            "wlog2w_ok": self.wlog2w_ok,
            "messages": list(self.messages),
        }


def moment(model: WeightModel, s: float) -> float:
    """E[W^s]."""
    if not math.isfinite(s):
        raise ValueError("moment order must be finite")
    return model.moment(s)


def neg_moment(model: WeightModel, s: float) -> float:
    return model.neg_moment(s)


def phi(model: WeightModel, s: float) -> float:
    """The structure function ``s - log2 E[W^s]``."""
    return s - math.log2(moment(model, s))


def psi(model: WeightModel, s: float) -> float:
    """``E[(W/2)^s]``; convex and decreasing on [0, 1] for valid laws."""
    return moment(model, s) * 2.0**-s


def moment_report(model: WeightModel, s: float) -> MomentReport:
    m = moment(model, s)
    neg = neg_moment(model, s) if s >= 0 else moment(model, -s)
    return MomentReport(s=s, m=m, phi=s - math.log2(m), neg_m=neg)


def moment_quadrature(model: LogNormal, s: float, nodes: int = 120) -> float:
    """E[W^s] for a log-normal law by Gauss-Hermite quadrature."""
    y, w = np.polynomial.hermite_e.hermegauss(nodes)
    integrand = np.exp(s * (model.sigma * y - 0.5 * model.sigma2))
    return math.fsum(w * integrand) / math.sqrt(2.0 * math.pi)


def validate(model: WeightModel) -> ValidationReport:
    """Check mean one, positivity and ``E[W log2 W] < 1``; never raises."""
    messages = []
    positive = model.is_positive()
    if not positive:
        messages.append("W must be strictly positive")
    try:
        mean = model.mean()
    except UndefinedMomentError as exc:
        mean = math.nan
        messages.append(str(exc))
    mean_ok = math.isfinite(mean) and abs(mean - 1.0) <= MEAN_TOL
    if isinstance(model, Empirical):
        total = math.fsum(model.probs)
        if abs(total - 1.0) > MEAN_TOL:
            mean_ok = False
            messages.append(f"probabilities sum to {total!r}, not 1")
    if not mean_ok:
        messages.append(f"E[W] = {mean!r} differs from 1 by more than {MEAN_TOL}")
    try:
        wlw = model.mean_wlog2w()
    except (ValueError, OverflowError) as exc:
        wlw = math.nan
        messages.append(str(exc))
    wlw_ok = math.isfinite(wlw) and wlw < 1.0
    if not wlw_ok:
        messages.append(f"E[W log2 W] = {wlw!r} is not < 1")
    return ValidationReport(model.family, mean, mean_ok, positive, wlw, wlw_ok, messages)


def require_valid(model: WeightModel) -> None:
    report = validate(model)
    if not report.valid:
        raise InvalidModelError("; ".join(report.messages))


def sample(model: WeightModel, stream: RandomStream) -> float:
    """One draw of W, consuming one block of ``stream``."""
    return float(model.from_words(*stream.words(1))[0])


def sample_many(model: WeightModel, stream: RandomStream, size: int) -> np.ndarray:
    return model.from_words(*stream.words(size))
