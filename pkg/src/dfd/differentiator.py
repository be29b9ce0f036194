"""Right-hand sides of the distributed differentiators and the consensus controller.

Everything here is a pure function from state to derivative. The time
integration lives in :mod:`dfd.sim`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .gains import GainSet
from .graph import DirectedGraph, laplacian


def signed_power(x, a: float):
    """``sign(x) * |x|**a`` with ``sign(0) = 0``; ``a = 0`` gives the sign function."""
    if a < 0:
        raise ValueError(f"exponent must be nonnegative, got {a}")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.abs(x) ** a
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EstimatorState:
    p_hat: np.ndarray
    q_hat: np.ndarray


@dataclass(frozen=True)
class ErrorState:
    e: np.ndarray
    z: np.ndarray
    y: np.ndarray

    @classmethod
    def from_errors(cls, e, z, g: DirectedGraph) -> "ErrorState":
        e = np.asarray(e, dtype=float)
        return cls(e=e, z=np.asarray(z, dtype=float), y=pinned_innovation(e, g))


def pinned_laplacian(g: DirectedGraph) -> np.ndarray:
    """``L + B``."""
    return laplacian(g) + np.diag(g.b)


def _check_len(g: DirectedGraph, **vecs):
    for name, v in vecs.items():
        if np.shape(v) != (g.n,):
            raise ValueError(f"{name} must have shape ({g.n},), got {np.shape(v)}")


def _check_finite(**vecs):
    for name, v in vecs.items():
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite entries in {name}")


def _neighbour_sum(g: DirectedGraph, r: np.ndarray) -> np.ndarray:
    # sum_j a_ij (r_i - r_j), formed from differences so a consensus r gives exactly zero
    return (g.A * (r[:, None] - r[None, :])).sum(axis=1)


def pinned_innovation(e, g: DirectedGraph) -> np.ndarray:
    """``(L + B) e`` evaluated edge by edge, so it vanishes exactly when ``e`` is zero."""
    e = np.asarray(e, dtype=float)
    _check_len(g, e=e)
    return _neighbour_sum(g, e) + g.b * e


def innovation_relative(p_hat, x, f: float, g: DirectedGraph) -> np.ndarray:
    """Innovation built from relative measurements ``x_i - x_j`` and, at pinned agents, ``x_i - f``."""
    p_hat = np.asarray(p_hat, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_len(g, p_hat=p_hat, x=x)
    r = p_hat - x
    pinned = g.b > 0
    y = _neighbour_sum(g, r)
    y[pinned] += g.b[pinned] * (r[pinned] + f)
    return y


def innovation_absolute(p_hat, f: float, g: DirectedGraph) -> np.ndarray:
    """Innovation built from absolute estimates, with ``f`` read only by pinned agents."""
    p_hat = np.asarray(p_hat, dtype=float)
    _check_len(g, p_hat=p_hat)
    pinned = g.b > 0
    y = _neighbour_sum(g, p_hat)
    y[pinned] += g.b[pinned] * (p_hat[pinned] - f)
    return y


def dfd_r_step(state: EstimatorState, y, u, gains: GainSet) -> EstimatorState:
    """Derivative of the relative-measurement differentiator. ``u`` feeds only ``q_hat``."""
    y = np.asarray(y, dtype=float)
    u = np.broadcast_to(np.asarray(u, dtype=float), y.shape)
    _check_finite(p_hat=state.p_hat, q_hat=state.q_hat, y=y, u=u)
    return EstimatorState(
        p_hat=state.q_hat - gains.k1 * signed_power(y, 0.5),
        q_hat=-gains.k2 * signed_power(y, 0.0) + u,
    )


def dfd_a_step(state: EstimatorState, f: float, g: DirectedGraph, gains: GainSet) -> EstimatorState:
    """Derivative of the absolute-measurement differentiator."""
    _check_finite(p_hat=state.p_hat, q_hat=state.q_hat, f=f)
    y = innovation_absolute(state.p_hat, f, g)
    return EstimatorState(
        p_hat=state.q_hat - gains.k1 * signed_power(y, 0.5),
        q_hat=-gains.k2 * signed_power(y, 0.0),
    )


def consensus_control(s, s0: float, v, b_fun, gains: GainSet, g: DirectedGraph):
    """Continuous output-consensus law.

    Returns ``(u, v_dot)``. The discontinuous sign term only drives ``v_dot``,
    so ``u`` stays continuous in time.
    """
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    b_fun = np.broadcast_to(np.asarray(b_fun, dtype=float), (g.n,))
    _check_len(g, s=s, v=v)
    if np.any(b_fun <= 0):
        raise ValueError(f"input gains must be positive, got {b_fun}")
    y = innovation_absolute(s, s0, g)
    u = (v - gains.k1 * signed_power(y, 0.5)) / b_fun
    return u, -gains.k2 * signed_power(y, 0.0)


def error_system_step(err: ErrorState, d, gains: GainSet, g: DirectedGraph):
    """Derivative ``(e_dot, z_dot)`` of the reduced error dynamics.

    ``y`` is recomputed from ``e`` so the stored ``err.y`` is not trusted.
    Disturbances above ``gains.l2`` only warn.
    """
    d = np.broadcast_to(np.asarray(d, dtype=float), (g.n,))
    if np.any(np.abs(d) > gains.l2 * (1 + 1e-12)):
        warnings.warn(f"disturbance exceeds bound l2={gains.l2}", RuntimeWarning, stacklevel=2)
    y = pinned_innovation(err.e, g)
    return err.z - gains.k1 * signed_power(y, 0.5), -gains.k2 * signed_power(y, 0.0) + d
