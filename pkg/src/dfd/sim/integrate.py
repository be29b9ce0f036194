"""Fixed-step RK4 integration of the coupled leader/follower/estimator dynamics.

The right-hand side is compiled with numba; derived channels (innovations,
errors, Lyapunov values) are reconstructed afterwards with numpy from the raw
state history.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..gains import GainSet
from ..graph import GraphCertificate, graph_certificate
from ..lyapunov import decrease_margins, lyapunov_series
from .scenario import INITIAL_KEYS, ScenarioConfig
from .signals import eval_packed, pack

MODE_CODES = {"dfd_r": 0, "dfd_a": 1, "controller": 2, "error": 3}


class DivergenceError(RuntimeError):
    def __init__(self, t_last: float, trajectory: "Trajectory | None" = None):
        super().__init__(f"state diverged; last valid time t={t_last:.6g}")
        self.t_last = t_last
        self.trajectory = trajectory


@njit(cache=True)
def _spow(x, a):
    if x > 0.0:
        return x ** a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


@njit(cache=True)
def _sgn(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@njit(cache=True)
def _rhs(mode, t, s, A, b, k1, k2, amp, freq, kind, bfun, out):
    # innovations use sum_j a_ij (r_i - r_j) + b_i (r_i - ref), which is exactly zero on consensus
    n = A.shape[0]
    if mode == 0:
        # s = [x, xdot, phat, qhat]; rows: 0 leader, 1..n disturbance, n+1..2n input
        f = eval_packed(amp, freq, kind, 0, t, 0)
        for i in range(n):
            ri = s[2 * n + i] - s[i]
            y = 0.0
            for j in range(n):
                if A[i, j] != 0.0:
                    y += A[i, j] * (ri - (s[2 * n + j] - s[j]))
            if b[i] != 0.0:
                y += b[i] * (ri + f)
            u = eval_packed(amp, freq, kind, n + 1 + i, t, 0)
            out[i] = s[n + i]
            out[n + i] = u + eval_packed(amp, freq, kind, 1 + i, t, 0)
            out[2 * n + i] = s[3 * n + i] - k1 * _spow(y, 0.5)
            out[3 * n + i] = -k2 * _sgn(y) + u
    elif mode == 1:
        # s = [phat, qhat]; row 0 leader
        f = eval_packed(amp, freq, kind, 0, t, 0)
        for i in range(n):
            y = 0.0
            for j in range(n):
                if A[i, j] != 0.0:
                    y += A[i, j] * (s[i] - s[j])
            if b[i] != 0.0:
                y += b[i] * (s[i] - f)
            out[i] = s[n + i] - k1 * _spow(y, 0.5)
            out[n + i] = -k2 * _sgn(y)
    elif mode == 2:
        # s = [s0, s_1..s_n, v_1..v_n]; row 0 leader rate, rows 1..n follower drift
        out[0] = eval_packed(amp, freq, kind, 0, t, 0)
        for i in range(n):
            y = 0.0
            for j in range(n):
                if A[i, j] != 0.0:
                    y += A[i, j] * (s[1 + i] - s[1 + j])
            if b[i] != 0.0:
                y += b[i] * (s[1 + i] - s[0])
            u = (s[1 + n + i] - k1 * _spow(y, 0.5)) / bfun[i]
            out[1 + i] = eval_packed(amp, freq, kind, 1 + i, t, 0) + bfun[i] * u
            out[1 + n + i] = -k2 * _sgn(y)
    else:
        # s = [e, z]; rows 0..n-1 disturbance
        for i in range(n):
            y = b[i] * s[i]
            for j in range(n):
                if A[i, j] != 0.0:
                    y += A[i, j] * (s[i] - s[j])
            out[i] = s[n + i] - k1 * _spow(y, 0.5)
            out[n + i] = -k2 * _sgn(y) + eval_packed(amp, freq, kind, i, t, 0)


@njit(cache=True)
def _rk4(mode, s0, dt, nsteps, A, b, k1, k2, amp, freq, kind, bfun, limit):
    dim = s0.shape[0]
    hist = np.empty((nsteps + 1, dim))
    hist[0] = s0
    s = s0.copy()
    r1 = np.empty(dim)
    r2 = np.empty(dim)
    r3 = np.empty(dim)
    r4 = np.empty(dim)
    tmp = np.empty(dim)
    for step in range(nsteps):
        t = step * dt
        _rhs(mode, t, s, A, b, k1, k2, amp, freq, kind, bfun, r1)
        for i in range(dim):
            tmp[i] = s[i] + 0.5 * dt * r1[i]
        _rhs(mode, t + 0.5 * dt, tmp, A, b, k1, k2, amp, freq, kind, bfun, r2)
        for i in range(dim):
            tmp[i] = s[i] + 0.5 * dt * r2[i]
        _rhs(mode, t + 0.5 * dt, tmp, A, b, k1, k2, amp, freq, kind, bfun, r3)
        for i in range(dim):
            tmp[i] = s[i] + dt * r3[i]
        _rhs(mode, t + dt, tmp, A, b, k1, k2, amp, freq, kind, bfun, r4)
        bad = False
        for i in range(dim):
            s[i] = s[i] + dt / 6.0 * (r1[i] + 2.0 * r2[i] + 2.0 * r3[i] + r4[i])
            if not (abs(s[i]) <= limit):
                bad = True
        if bad:
            return hist, step
        hist[step + 1] = s
    return hist, nsteps


@dataclass
class Trajectory:
    """Per-step record of one run on a uniform grid.

    ``channels`` holds named arrays of shape ``(T, n)`` (agent channels) or
    ``(T,)`` (leader channels and Lyapunov values).
    """
    mode: str
    times: np.ndarray
    channels: dict = field(default_factory=dict)
    gains: GainSet | None = None
    cert: GraphCertificate | None = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def __getattr__(self, name):
        channels = self.__dict__.get("channels", {})
        if name in channels:
            return channels[name]
        raise AttributeError(name)

    def decimated(self, k: int) -> "Trajectory":
        idx = np.arange(0, self.times.size, k)
        return Trajectory(self.mode, self.times[idx],
                          {key: val[idx] for key, val in self.channels.items()},
                          self.gains, self.cert)

    def innovation_residual(self) -> float:
        """Max mismatch between recorded ``y`` and ``(L + B) e``.

        Relative to ``||L + B||_inf`` times the magnitude of the raw operands
        (estimates, follower states, leader value), since ``e`` itself is a
        difference of those and inherits their rounding.
        """
        M = self.cert.L + self.cert.B
        ref = self.e @ M.T
        scale = np.abs(M).sum(axis=1).max() * np.maximum(self.operand_scale, 1e-300)
        return float((np.abs(self.y - ref).max(axis=1) / scale).max())


def _packed_signals(config: ScenarioConfig):
    n = config.n
    if config.mode == "dfd_r":
        sigs = [config.leader, *config.agent_signals("disturbances"), *config.agent_signals("inputs")]
    elif config.mode == "error":
        sigs = list(config.agent_signals("disturbances"))
    else:
        sigs = [config.leader, *config.agent_signals("disturbances")]
    amp, freq, kind = pack(sigs)
    bfun = np.asarray(config.input_gains or (1.0,) * n, dtype=float)
    return amp, freq, kind, bfun


def initial_state(config: ScenarioConfig) -> np.ndarray:
    parts = [np.atleast_1d(config.initial_vector(k)) for k in INITIAL_KEYS[config.mode]]
    return np.concatenate(parts).astype(float)


def _channels(config: ScenarioConfig, times, hist, gains: GainSet, cert: GraphCertificate) -> dict:
    n = config.n
    g = config.graph
    b = g.b
    edges = list(zip(*np.nonzero(g.A)))

    def local_innovation(r, leader_term):
        # sum_j a_ij (r_i - r_j) + b_i (r_i + leader_term), same operation order as the kernel
        y = np.zeros_like(r)
        for i, j in edges:
            y[:, i] += g.A[i, j] * (r[:, i] - r[:, j])
        return y + b * (r + leader_term[:, None])

    ch: dict = {}
    if config.mode == "dfd_r":
        x, xd, ph, qh = (hist[:, k * n:(k + 1) * n] for k in range(4))
        f, fd, fdd = (config.leader(times, o) for o in range(3))
        delta = np.column_stack([s(times) for s in config.agent_signals("disturbances")])
        u = np.column_stack([s(times) for s in config.agent_signals("inputs")])
        ch.update(x=x, xdot=xd, phat=ph, qhat=qh, f=f, fdot=fd, u=u)
        ch["y"] = local_innovation(ph - x, f)
        ch["e"] = ph - (x - f[:, None])
        ch["z"] = qh - (xd - fd[:, None])
        ch["d"] = fdd[:, None] - delta
        ch["operand_scale"] = np.maximum(np.abs(np.hstack([x, ph])).max(axis=1), np.abs(f))
    elif config.mode == "dfd_a":
        ph, qh = hist[:, :n], hist[:, n:]
        f, fd, fdd = (config.leader(times, o) for o in range(3))
        ch.update(phat=ph, qhat=qh, f=f, fdot=fd)
        ch["y"] = local_innovation(ph, -f)
        ch["e"] = ph - f[:, None]
        ch["z"] = qh - fd[:, None]
        ch["d"] = np.repeat(-fdd[:, None], n, axis=1)
        ch["operand_scale"] = np.maximum(np.abs(ph).max(axis=1), np.abs(f))
    elif config.mode == "controller":
        s0, s, v = hist[:, 0], hist[:, 1:1 + n], hist[:, 1 + n:]
        a0, a0d = config.leader(times, 0), config.leader(times, 1)
        drift = config.agent_signals("disturbances")
        a = np.column_stack([sig(times) for sig in drift])
        ad = np.column_stack([sig(times, 1) for sig in drift])
        bfun = np.asarray(config.input_gains or (1.0,) * n, dtype=float)
        y = local_innovation(s, -s0)
        # x columns carry the follower outputs for this mode
        ch.update(s0=s0, x=s, v=v, y=y)
        ch["u"] = (v - gains.k1 * np.sign(y) * np.sqrt(np.abs(y))) / bfun
        ch["e"] = s - s0[:, None]
        ch["z"] = v + a - a0[:, None]
        ch["d"] = ad - a0d[:, None]
        ch["operand_scale"] = np.maximum(np.abs(s).max(axis=1), np.abs(s0))
    else:
        e, z = hist[:, :n], hist[:, n:]
        ch.update(e=e, z=z, y=local_innovation(e, np.zeros(len(times))))
        ch["d"] = np.column_stack([s(times) for s in config.agent_signals("disturbances")])
        ch["operand_scale"] = np.abs(e).max(axis=1)
    V, V1, V2 = lyapunov_series(ch["y"], ch["z"], gains, cert.w)
    ch.update(V=V, V1=V1, V2=V2)
    ch["decrease_margin"] = decrease_margins(V, config.dt, gains)
    return ch


def integrate(config: ScenarioConfig, gains: GainSet | None = None,
              cert: GraphCertificate | None = None) -> Trajectory:
    """Integrate ``config`` over ``[0, t_end]`` with classical RK4 at step ``dt``.

    The topology must satisfy the leader/connectivity assumption
    (:class:`~dfd.graph.AssumptionViolation` otherwise). Raises
    :class:`DivergenceError`, carrying the valid prefix, if any state leaves
    ``[-divergence_limit, divergence_limit]`` or becomes non-finite.
    """
    cert = cert or graph_certificate(config.graph)
    gains = gains or config.resolve_gains(cert)
    nsteps = int(round(config.t_end / config.dt))
    A = np.ascontiguousarray(config.graph.A)
    amp, freq, kind, bfun = _packed_signals(config)
    hist, done = _rk4(MODE_CODES[config.mode], initial_state(config), float(config.dt), nsteps,
                      A, np.ascontiguousarray(config.graph.b), float(gains.k1), float(gains.k2),
                      amp, freq, kind, bfun, float(config.divergence_limit))
    times = np.arange(done + 1) * config.dt
    traj = Trajectory(config.mode, times, _channels(config, times, hist[:done + 1], gains, cert),
                      gains, cert)
    if done < nsteps:
        raise DivergenceError(float(times[-1]), traj)
    return traj


def rhs(config: ScenarioConfig, gains: GainSet, t: float, state) -> np.ndarray:
    """Evaluate the compiled right-hand side once (for testing against the numpy step functions)."""
    A = np.ascontiguousarray(config.graph.A)
    amp, freq, kind, bfun = _packed_signals(config)
    out = np.empty(len(state))
    _rhs(MODE_CODES[config.mode], float(t), np.asarray(state, dtype=float), A,
         np.ascontiguousarray(config.graph.b), float(gains.k1), float(gains.k2),
         amp, freq, kind, bfun, out)
    return out


CHANNEL_GROUPS = {"e": ("e",), "z": ("z",), "both": ("e", "z")}


def convergence_time(traj: Trajectory, which: str = "both", tol: float = 1e-2,
                     window: float = 1.0) -> float | None:
    """Earliest ``t*`` with the max-norm of the chosen errors below ``tol`` on ``[t*, t* + window]``.

    ``which`` is ``"e"`` (positions/outputs), ``"z"`` (velocities/integral
    channel) or ``"both"``. Returns ``None`` if no such ``t*`` fits in the horizon.
    """
    times = traj.times
    if window > times[-1] - times[0]:
        raise ValueError(f"window {window} exceeds horizon {times[-1] - times[0]}")
    norm = np.zeros(times.size)
    for name in CHANNEL_GROUPS[which]:
        norm = np.maximum(norm, np.abs(traj.channels[name]).max(axis=1))
    T = times.size
    w = int(math.ceil(window / traj.dt - 1e-9))
    bad = np.where(norm >= tol, np.arange(T), T)
    next_bad = np.minimum.accumulate(bad[::-1])[::-1]
    starts = np.arange(T - w)
    ok = next_bad[:T - w] > starts + w
    if not ok.any():
        return None
    return float(times[int(np.argmax(ok))])
