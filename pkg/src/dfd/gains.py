"""Gain selection for the distributed differentiator.

The sufficient condition couples both gains to the graph through the smallest
eigenvalue of ``G``::

    k2 >= l2 / rho
    k1 >= sqrt((2 * (gamma0 + gamma1) + 1) / lambda1 * k2)
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

DEFAULT_RHO = 0.75


@dataclass(frozen=True)
class DerivedConstants:
    rho: float
    l: float
    l1: float
    l2: float
    gamma0: float
    gamma1: float
    gamma2: float


@dataclass(frozen=True)
class GainSet:
    k1: float
    k2: float
    rho: float
    l: float
    l1: float
    l2: float
    gamma0: float
    gamma1: float
    gamma2: float

    @property
    def k(self) -> float:
        return self.k2 / self.k1 if self.k1 > 0 else math.nan

    @property
    def constants(self) -> DerivedConstants:
        return DerivedConstants(self.rho, self.l, self.l1, self.l2,
                                self.gamma0, self.gamma1, self.gamma2)

    @classmethod
    def from_constants(cls, k1: float, k2: float, c: DerivedConstants) -> "GainSet":
        return cls(k1=float(k1), k2=float(k2), **asdict(c))


@dataclass(frozen=True)
class GainReport:
    """Margins of both gain inequalities. Positive margin means satisfied."""
    k1: float
    k2: float
    k1_min: float
    k2_min: float
    k1_margin: float
    k2_margin: float
    lambda1: float

    @property
    def k1_ok(self) -> bool:
        return self.k1_margin >= 0

    @property
    def k2_ok(self) -> bool:
        return self.k2_margin >= 0

    @property
    def certified(self) -> bool:
        return self.k1_ok and self.k2_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(k1_ok=self.k1_ok, k2_ok=self.k2_ok, certified=self.certified,
                 status="certified" if self.certified else "uncertified but simulable")
        return d


def derived_constants(rho: float, w, l: float, l1: float = 0.0) -> DerivedConstants:
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    w = np.asarray(w, dtype=float)
    if w.size == 0 or np.any(w <= 0):
        raise ValueError("w must be a nonempty positive vector")
    if l < 0 or l1 < 0:
        raise ValueError("bounds l and l1 must be nonnegative")
    gamma1 = (1.0 + rho) * float(w.max())
    gamma0 = (1.0 + 3.0 * gamma1) / (1.0 - rho)
    gamma2 = 2.0 * gamma1 / (1.0 + rho) + gamma0 / 3.0
    return DerivedConstants(rho=float(rho), l=float(l), l1=float(l1), l2=float(l + l1),
                            gamma0=gamma0, gamma1=gamma1, gamma2=gamma2)


def _k1_bound(k2: float, lambda1: float, c: DerivedConstants) -> float:
    return math.sqrt((2.0 * (c.gamma0 + c.gamma1) + 1.0) / lambda1 * k2)


def minimal_gains(constants: DerivedConstants, lambda1: float) -> GainSet:
    """Smallest gains meeting both inequalities with equality."""
    if lambda1 <= 0:
        raise ValueError(f"lambda1 must be positive, got {lambda1}")
    k2 = constants.l2 / constants.rho
    k1 = _k1_bound(k2, lambda1, constants)
    if k2 == 0.0:
        warnings.warn("l2 = 0 gives k2 = 0; finite-time convergence needs k2 > 0",
                      RuntimeWarning, stacklevel=2)
    return GainSet.from_constants(k1, k2, constants)


def check_gains(k1: float, k2: float, constants: DerivedConstants, lambda1: float) -> GainReport:
    """Evaluate both inequalities. Never raises on a violated inequality."""
    if k1 <= 0 or k2 <= 0:
        raise ValueError(f"gains must be positive, got k1={k1}, k2={k2}")
    if lambda1 <= 0:
        raise ValueError(f"lambda1 must be positive, got {lambda1}")
    k2_min = constants.l2 / constants.rho
    k1_min = _k1_bound(k2, lambda1, constants)
    return GainReport(k1=float(k1), k2=float(k2), k1_min=k1_min, k2_min=k2_min,
                      k1_margin=k1 - k1_min, k2_margin=k2 - k2_min, lambda1=float(lambda1))


def settling_time_bound(V0: float, k: float, gamma2: float) -> float:
    """``3 * gamma2**(2/3) * V0 / k``, linear in ``V0``.

    This is the bound in the form the original derivation states it. Integrating
    ``dV/dt <= -c V**(2/3)`` exactly gives :func:`finite_time_bound` instead,
    which scales as ``V0**(1/3)``; both agree at ``V0 = 1``.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if V0 < 0 or gamma2 <= 0:
        raise ValueError("need V0 >= 0 and gamma2 > 0")
    return 3.0 * gamma2 ** (2.0 / 3.0) * V0 / k


def finite_time_bound(V0: float, c: float, alpha: float) -> float:
    """Settling time bound ``V0**(1-alpha) / (c (1-alpha))`` for ``dV/dt <= -c V**alpha``."""
    if c <= 0 or not 0 < alpha < 1:
        raise ValueError("need c > 0 and 0 < alpha < 1")
    return V0 ** (1.0 - alpha) / (c * (1.0 - alpha))


def decay_rate(gains: GainSet) -> float:
    """Coefficient ``c`` in ``dV/dt <= -c V**(2/3)``."""
    return gains.k * gains.gamma2 ** (-2.0 / 3.0)
