"""The dimension relation ``zeta0 = phi(zeta)`` and its closed-form special cases."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .roots import bisect
from .weights import LN4, WeightModel, phi, require_valid


@dataclass(frozen=True)
class KpzSolution:
    zeta0: float
    zeta: float
    residual: float
    iterations: int
    model: WeightModel

    def as_dict(self) -> dict:
        return {"zeta": self.zeta, "residual": self.residual, "iterations": self.iterations}


def _unit(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


def predict_zeta0(model: WeightModel, zeta: float) -> float:
    """Euclidean dimension of a set whose quantum dimension is ``zeta``."""
    _unit("zeta", zeta)
    return phi(model, zeta)


def solve_zeta(model: WeightModel, zeta0: float, tol: float = 1e-12, maxiter: int = 60) -> KpzSolution:
    """Quantum dimension: the unique root of ``phi(zeta) = zeta0`` in [0, 1]."""
    _unit("zeta0", zeta0)
    require_valid(model)
    zeta, it = bisect(lambda z: phi(model, z) - zeta0, 0.0, 1.0, tol, maxiter)
    return KpzSolution(zeta0, zeta, abs(phi(model, zeta) - zeta0), it, model)


def gaussian_kpz(sigma2: float, zeta: float) -> float:
    """``zeta + sigma2 / ln 4 * zeta (1 - zeta)`` for log-normal weights."""
    if not 0.0 < sigma2 < LN4:
        raise ValueError(f"sigma2 must lie in (0, ln 4), got {sigma2!r}")
    _unit("zeta", zeta)
    return zeta + sigma2 / LN4 * zeta * (1.0 - zeta)


def twopoint_kpz(sigma: float, zeta: float) -> float:
    """``1 + zeta - log2((1 - sigma)^zeta + (1 + sigma)^zeta)`` for W = 1 +/- sigma."""
    if not 0.0 <= sigma < 1.0:
        raise ValueError(f"sigma must lie in [0, 1), got {sigma!r}")
    _unit("zeta", zeta)
    return 1.0 + zeta - math.log2((1.0 - sigma) ** zeta + (1.0 + sigma) ** zeta)


def central_charge(sigma2: float) -> float:
    """The k with ``1 / (k + 2) = sigma2 / ln 4``.

    Only the coefficient of the quadratic term is matched; no claim is made
    about sign conventions of the two-dimensional scaling weights.
    """
    if not 0.0 < sigma2 < LN4:
        raise ValueError(f"sigma2 must lie in (0, ln 4), got {sigma2!r}")
    return LN4 / sigma2 - 2.0
