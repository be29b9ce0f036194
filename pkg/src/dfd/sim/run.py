"""Full pipeline for one scenario: certificate, gains, simulation, checks, artifacts."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..gains import check_gains, decay_rate, finite_time_bound, settling_time_bound
from ..graph import graph_certificate
from ..lyapunov import certify_decrease
from .integrate import DivergenceError, Trajectory, convergence_time, integrate
from .scenario import ScenarioConfig

CSV_GROUPS = ("x", "xdot", "phat", "qhat", "y", "e", "z", "u")
CSV_SCALARS = ("V", "V1", "V2")


@dataclass
class RunSummary:
    scenario: str
    mode: str
    n: int
    dt: float
    t_end: float
    tol: float
    window: float
    decimate: int
    w: list
    lambda1: float
    gains: dict
    gain_certification: dict
    convergence_time: dict
    settling: dict
    lyapunov: dict
    innovation_residual: float
    diverged_at: float | None = None
    outputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def csv_columns(traj: Trajectory, n: int) -> tuple[list[str], np.ndarray]:
    names = ["t"]
    cols = [traj.times[:, None]]
    for key in CSV_GROUPS:
        if key in traj.channels:
            names += [f"{key}_{i + 1}" for i in range(n)]
            cols.append(traj.channels[key])
    for key in CSV_SCALARS:
        names.append(key)
        cols.append(traj.channels[key][:, None])
    return names, np.hstack(cols)


def write_csv(traj: Trajectory, path, n: int) -> None:
    names, data = csv_columns(traj, n)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="")


def summarize(config: ScenarioConfig, traj: Trajectory, diverged_at: float | None = None) -> RunSummary:
    gains, cert = traj.gains, traj.cert
    report = check_gains(gains.k1, gains.k2, gains.constants, cert.lambda1)
    horizon = traj.times[-1] - traj.times[0]
    conv = {}
    for which in ("e", "z", "both"):
        conv[which] = (convergence_time(traj, which, config.tol, config.window)
                       if config.window <= horizon else None)
    V0 = float(traj.V[0])
    settling = {
        "V0": V0,
        "bound": settling_time_bound(V0, gains.k, gains.gamma2),
        "finite_time_bound": finite_time_bound(V0, decay_rate(gains), 2.0 / 3.0),
        "observed": conv["both"],
    }
    lyap = certify_decrease(traj, gains, cert) if traj.times.size >= 3 else None
    gain_fields = asdict(gains)
    gain_fields["k"] = gains.k
    return RunSummary(
        scenario=config.name, mode=config.mode, n=config.n, dt=config.dt, t_end=config.t_end,
        tol=config.tol, window=config.window, decimate=config.decimate,
        w=cert.w.tolist(), lambda1=cert.lambda1, gains=gain_fields,
        gain_certification=report.to_dict(), convergence_time=conv, settling=settling,
        lyapunov=lyap.to_dict() if lyap else {}, innovation_residual=traj.innovation_residual(),
        diverged_at=diverged_at,
    )


def run_scenario(config: ScenarioConfig, out_dir=None) -> tuple[RunSummary, Trajectory]:
    """Simulate ``config`` and, if ``out_dir`` is given, write ``<name>.csv`` and ``<name>_summary.json``.

    On divergence the partial artifacts are still written before the
    :class:`DivergenceError` propagates.
    """
    cert = graph_certificate(config.graph)
    gains = config.resolve_gains(cert)
    diverged = None
    try:
        traj = integrate(config, gains=gains, cert=cert)
    except DivergenceError as exc:
        diverged = exc
        traj = exc.trajectory
    summary = summarize(config, traj, diverged.t_last if diverged else None)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{config.name}.csv"
        json_path = out / f"{config.name}_summary.json"
        write_csv(traj.decimated(config.decimate), csv_path, config.n)
        summary.outputs = {"csv": str(csv_path), "summary": str(json_path)}
        json_path.write_text(summary.to_json())
    if diverged:
        raise diverged
    return summary, traj
