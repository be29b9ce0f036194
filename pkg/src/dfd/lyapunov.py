"""Lyapunov certificate for the error dynamics.

With ``v = z / k1`` and ``y = (L + B) e``::

    V  = V1 + gamma0 * V2
    V1 = sum_i w_i * integral_{sign(v_i) v_i**2}^{y_i} (sign(s)|s|**0.5 - v_i) ds
    V2 = sum_i |v_i|**3 / 3

and along solutions with admissible gains ``dV/dt <= -k gamma2**(-2/3) V**(2/3)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .differentiator import ErrorState, pinned_laplacian, signed_power
from .gains import GainSet, check_gains, decay_rate
from .graph import DirectedGraph, GraphCertificate

DEFAULT_V_FLOOR = 1e-6
DEFAULT_SLACK_FACTOR = 10.0


@dataclass(frozen=True)
class LyapunovSample:
    t: float
    V: float
    V1: float
    V2: float
    decrease_margin: float = math.nan


@dataclass(frozen=True)
class DecreaseReport:
    violations: int
    worst_margin: float | None
    samples_checked: int
    v_floor: float
    slack: float
    certified_gains: bool

    def to_dict(self) -> dict:
        return asdict(self)


def v1_terms(y, v) -> np.ndarray:
    """Per-agent value of the integral in ``V1`` (before weighting).

    Evaluates ``(2/3)|y|**1.5 - v*y + |v|**3/3`` in a factored form that is
    nonnegative term by term and exactly zero when ``y = sign(v) v**2``.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    sig = signed_power(y, 0.5)
    # the integrand is odd, so flip to sig >= 0
    flip = np.where(sig < 0, -1.0, 1.0)
    a = np.abs(sig)
    c = v * flip
    same = (1.0 / 3.0) * (a - c) ** 2 * (2.0 * a + c)
    opposite = (2.0 / 3.0) * a ** 3 + np.abs(c) * a ** 2 + (1.0 / 3.0) * np.abs(c) ** 3
    return np.where(c >= 0, same, opposite)


def v1_closed_form(y, v, w) -> np.ndarray | float:
    """Weighted sum of :func:`v1_terms` over the last axis."""
    out = v1_terms(y, v) @ np.asarray(w, dtype=float)
    return float(out) if np.ndim(out) == 0 else out


def v2(v) -> np.ndarray | float:
    out = np.sum(np.abs(np.asarray(v, dtype=float)) ** 3, axis=-1) / 3.0
    return float(out) if np.ndim(out) == 0 else out


def lyapunov_series(y, z, gains: GainSet, w):
    """Vectorised ``(V, V1, V2)`` over rows of ``y`` and ``z``."""
    v = np.asarray(z, dtype=float) / gains.k1
    V1 = v1_closed_form(y, v, w)
    V2 = v2(v)
    return V1 + gains.gamma0 * V2, V1, V2


def v_total(err: ErrorState, gains: GainSet, cert: GraphCertificate,
            g: DirectedGraph | None = None, t: float = 0.0) -> LyapunovSample:
    """Evaluate ``V`` at one error state.

    ``err.y`` must equal ``(L + B) e``; the check uses ``cert`` (or ``g`` if given).
    """
    M = pinned_laplacian(g) if g is not None else cert.L + cert.B
    y_ref = M @ err.e
    scale = np.abs(M).sum(axis=1).max() * np.abs(err.e).max(initial=0.0)
    if np.abs(err.y - y_ref).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("inconsistent error state: y != (L + B) e")
    V, V1, V2 = lyapunov_series(err.y, err.z, gains, cert.w)
    return LyapunovSample(t=float(t), V=float(V), V1=float(V1), V2=float(V2))


def decrease_margins(V, dt: float, gains: GainSet) -> np.ndarray:
    """Central-difference ``dV/dt`` minus the guaranteed rate; NaN at both ends."""
    V = np.asarray(V, dtype=float)
    out = np.full(V.shape, np.nan)
    if V.size >= 3:
        dV = (V[2:] - V[:-2]) / (2.0 * dt)
        out[1:-1] = dV + decay_rate(gains) * V[1:-1] ** (2.0 / 3.0)
    return out


def default_slack(dt: float, gains: GainSet, factor: float = DEFAULT_SLACK_FACTOR) -> float:
    return factor * dt * (gains.k1 ** 2 + gains.k2)


def certify_decrease(traj, gains: GainSet, cert: GraphCertificate,
                     threshold: float = DEFAULT_V_FLOOR, slack: float | None = None) -> DecreaseReport:
    """Count samples where ``V`` decays slower than guaranteed.

    ``traj`` needs ``times`` (uniform) and ``V``. Samples with ``V <= threshold``
    sit in the chattering band and are skipped. With uncertified gains the
    report is informational only.
    """
    times = np.asarray(traj.times, dtype=float)
    V = np.asarray(traj.V, dtype=float)
    if V.size < 3:
        raise ValueError("need at least 3 samples to estimate dV/dt")
    dt = float(times[1] - times[0])
    if slack is None:
        slack = default_slack(dt, gains)
    margins = decrease_margins(V, dt, gains)[1:-1]
    checked = V[1:-1] > threshold
    m = margins[checked]
    certified = check_gains(gains.k1, gains.k2, gains.constants, cert.lambda1).certified \
        if gains.k1 > 0 and gains.k2 > 0 else False
    return DecreaseReport(
        violations=int(np.sum(m > slack)),
        worst_margin=float(m.max()) if m.size else None,
        samples_checked=int(m.size),
        v_floor=float(threshold),
        slack=float(slack),
        certified_gains=certified,
    )


def sign_gap_inequality(y, v) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of ``|v|**2 |sgn y - sgn v| <= 2 |v - sign(y)|y|**0.5|**2``.

    Used when bounding the cross term of ``dV/dt``; returns ``(lhs, rhs)``.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    lhs = v ** 2 * np.abs(np.sign(y) - np.sign(v))
    rhs = 2.0 * (v - signed_power(y, 0.5)) ** 2
    return lhs, rhs
