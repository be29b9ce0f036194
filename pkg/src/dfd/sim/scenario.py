"""Scenario configuration, JSON schema and the built-in simulation scenarios."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from ..gains import DEFAULT_RHO, GainSet, derived_constants, minimal_gains
from ..graph import DirectedGraph, GraphCertificate, GraphError, graph_from_dict
from .signals import Signal, Term

MODES = ("dfd_r", "dfd_a", "controller", "error")

# initial-condition keys per mode; vectors unless listed in SCALAR_KEYS
INITIAL_KEYS = {
    "dfd_r": ("x", "xdot", "phat", "qhat"),
    "dfd_a": ("phat", "qhat"),
    "controller": ("s0", "s", "v"),
    "error": ("e", "z"),
}
SCALAR_KEYS = {"s0"}


class ConfigError(ValueError):
    """Bad scenario config. ``pointer`` is a JSON pointer to the offending field."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


@dataclass(frozen=True)
class GainSpec:
    """Explicit gains, or ``auto`` (minimal certified gains for ``rho``).

    ``l`` and ``l1`` default to bounds derived from the scenario signals.
    """
    k1: float | None = None
    k2: float | None = None
    auto: bool = False
    rho: float = DEFAULT_RHO
    l: float | None = None
    l1: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    mode: str
    graph: DirectedGraph
    gains: GainSpec
    leader: Signal = Signal()
    disturbances: tuple[Signal, ...] = ()
    inputs: tuple[Signal, ...] = ()
    input_gains: tuple[float, ...] = ()
    initial: dict = field(default_factory=dict)
    dt: float = 1e-4
    t_end: float = 20.0
    tol: float = 1e-2
    window: float = 1.0
    decimate: int = 10
    divergence_limit: float = 1e6

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}", "/mode")
        if not self.dt > 0:
            raise ConfigError("dt must be positive", "/dt")
        if not self.t_end > self.dt:
            raise ConfigError("t_end must exceed dt", "/t_end")
        if not self.tol > 0:
            raise ConfigError("tol must be positive", "/tol")
        if self.window < 0:
            raise ConfigError("window must be nonnegative", "/window")
        if self.decimate < 1:
            raise ConfigError("decimate must be >= 1", "/decimate")
        n = self.graph.n
        for key, name in (("disturbances", "disturbances"), ("inputs", "inputs")):
            seq = getattr(self, key)
            if seq and len(seq) != n:
                raise ConfigError(f"expected {n} entries, got {len(seq)}", f"/{name}")
        if self.input_gains and len(self.input_gains) != n:
            raise ConfigError(f"expected {n} entries", "/input_gains")
        if any(g <= 0 for g in self.input_gains):
            raise ConfigError("input gains must be positive", "/input_gains")
        for key, val in self.initial.items():
            if key not in INITIAL_KEYS[self.mode]:
                raise ConfigError(f"unknown initial value for mode {self.mode}", f"/initial/{key}")
            if key not in SCALAR_KEYS and np.shape(val) != (n,):
                raise ConfigError(f"expected {n} entries", f"/initial/{key}")

    @property
    def n(self) -> int:
        return self.graph.n

    def initial_vector(self, key: str) -> np.ndarray | float:
        if key in SCALAR_KEYS:
            return float(self.initial.get(key, 0.0))
        return np.asarray(self.initial.get(key, np.zeros(self.n)), dtype=float)

    def agent_signals(self, which: str) -> tuple[Signal, ...]:
        seq = getattr(self, which)
        return tuple(seq) if seq else (Signal(),) * self.n

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def default_bounds(self) -> tuple[float, float]:
        """``(l, l1)`` implied by the scenario signals."""
        dist = self.agent_signals("disturbances")
        if self.mode == "dfd_r":
            return self.leader.bound(2), max(s.bound(0) for s in dist)
        if self.mode == "dfd_a":
            return self.leader.bound(2), 0.0
        if self.mode == "controller":
            return max(s.bound(1) for s in dist) + self.leader.bound(1), 0.0
        return max(s.bound(0) for s in dist), 0.0

    def resolve_gains(self, cert: GraphCertificate) -> GainSet:
        l_sig, l1_sig = self.default_bounds()
        spec = self.gains
        consts = derived_constants(
            spec.rho, cert.w,
            l_sig if spec.l is None else spec.l,
            l1_sig if spec.l1 is None else spec.l1,
        )
        if spec.auto:
            return minimal_gains(consts, cert.lambda1)
        return GainSet.from_constants(spec.k1, spec.k2, consts)

    def to_dict(self) -> dict:
        g = self.gains
        gains = {"rho": g.rho}
        if g.auto:
            gains["auto"] = True
        else:
            gains.update(k1=g.k1, k2=g.k2)
        if g.l is not None:
            gains["l"] = g.l
        if g.l1 is not None:
            gains["l1"] = g.l1
        d = {
            "name": self.name, "mode": self.mode, "graph": self.graph.to_dict(),
            "gains": gains, "leader": self.leader.to_list(),
            "initial": {k: (float(v) if k in SCALAR_KEYS else np.asarray(v, float).tolist())
                        for k, v in self.initial.items()},
            "dt": self.dt, "t_end": self.t_end, "tol": self.tol,
            "window": self.window, "decimate": self.decimate,
        }
        if self.disturbances:
            d["disturbances"] = [s.to_list() for s in self.disturbances]
        if self.inputs:
            d["inputs"] = [s.to_list() for s in self.inputs]
        if self.input_gains:
            d["input_gains"] = list(self.input_gains)
        return d


_TERM = {
    "type": "object",
    "properties": {
        "amplitude": {"type": "number"},
        "frequency": {"type": "number", "minimum": 0},
        "kind": {"enum": ["sin", "cos"]},
    },
    "required": ["amplitude", "frequency"],
    "additionalProperties": False,
}
_SIGNAL = {"oneOf": [{"type": "number"}, {"type": "array", "items": _TERM}]}
_VECTOR = {"type": "array", "items": {"type": "number"}}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["mode", "graph", "gains"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "mode": {"enum": list(MODES)},
        "graph": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["n", "A", "b"],
                    "properties": {
                        "n": {"type": "integer", "minimum": 1},
                        "A": {"type": "array", "items": _VECTOR},
                        "b": _VECTOR,
                        "description": {"type": "string"},
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "gains": {
            "type": "object",
            "properties": {
                "k1": {"type": "number", "exclusiveMinimum": 0},
                "k2": {"type": "number", "exclusiveMinimum": 0},
                "auto": {"type": "boolean"},
                "rho": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "l": {"type": "number", "minimum": 0},
                "l1": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "leader": _SIGNAL,
        "disturbances": {"type": "array", "items": _SIGNAL},
        "inputs": {"type": "array", "items": _SIGNAL},
        "input_gains": _VECTOR,
        "initial": {
            "type": "object",
            "additionalProperties": {"oneOf": [{"type": "number"}, _VECTOR]},
        },
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "window": {"type": "number", "minimum": 0},
        "decimate": {"type": "integer", "minimum": 1},
    },
}


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def _signal(raw) -> Signal:
    if isinstance(raw, (int, float)):
        return Signal.constant(raw)
    return Signal(tuple(Term(float(t["amplitude"]), float(t["frequency"]), t.get("kind", "sin"))
                        for t in raw))


def config_from_dict(d: dict, base_dir: Path | None = None) -> ScenarioConfig:
    """Validate against :data:`SCHEMA` and build a config.

    ``graph`` may be an inline object or a path (relative to ``base_dir``).
    """
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(SCHEMA).iter_errors(d))
    if err is not None:
        raise ConfigError(err.message, _pointer(err.absolute_path))
    raw_graph = d["graph"]
    if isinstance(raw_graph, str):
        gpath = Path(raw_graph)
        if base_dir is not None and not gpath.is_absolute():
            gpath = base_dir / gpath
        try:
            raw_graph = json.loads(gpath.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read graph file: {exc}", "/graph") from None
    try:
        graph = graph_from_dict(raw_graph)
    except GraphError as exc:
        raise ConfigError(str(exc), "/graph") from None
    g = d["gains"]
    if g.get("auto", False):
        if "k1" in g or "k2" in g:
            raise ConfigError("explicit gains conflict with auto", "/gains/auto")
    else:
        for key in ("k1", "k2"):
            if key not in g:
                raise ConfigError(f"'{key}' is required unless auto is true", f"/gains/{key}")
    gains = GainSpec(k1=g.get("k1"), k2=g.get("k2"), auto=g.get("auto", False),
                     rho=g.get("rho", DEFAULT_RHO), l=g.get("l"), l1=g.get("l1"))
    return ScenarioConfig(
        name=d.get("name", "scenario"),
        mode=d["mode"],
        graph=graph,
        gains=gains,
        leader=_signal(d.get("leader", [])),
        disturbances=tuple(_signal(s) for s in d.get("disturbances", [])),
        inputs=tuple(_signal(s) for s in d.get("inputs", [])),
        input_gains=tuple(float(x) for x in d.get("input_gains", [])),
        initial={k: (float(v) if k in SCALAR_KEYS else np.asarray(v, dtype=float))
                 for k, v in d.get("initial", {}).items()},
        dt=float(d.get("dt", 1e-4)),
        t_end=float(d.get("t_end", 20.0)),
        tol=float(d.get("tol", 1e-2)),
        window=float(d.get("window", 1.0)),
        decimate=int(d.get("decimate", 10)),
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"file not found: {path}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return config_from_dict(raw, base_dir=path.parent)


def surrogate_topology() -> DirectedGraph:
    """Four followers on a unit directed cycle 1->2->3->4->1, leader pinned to follower 1."""
    text = resources.files("dfd.data").joinpath("topology_A_surrogate.json").read_text()
    return graph_from_dict(json.loads(text))


def scenario_vi_a() -> ScenarioConfig:
    """Relative-measurement differentiator with disturbed, uncontrolled double integrators.

    Follower initial velocities are unspecified for this example and default to zero.
    """
    return ScenarioConfig(
        name="vi-a",
        mode="dfd_r",
        graph=surrogate_topology(),
        gains=GainSpec(k1=5.0, k2=4.0),
        leader=Signal.of((1.0, 1.0, "sin")),
        disturbances=(
            Signal.of((-0.25, 0.5, "sin")),
            Signal.of((-0.25, 0.5, "cos")),
            Signal.of((-1.21, 1.1, "cos")),
            Signal.of((-0.64, 0.8, "sin")),
        ),
        initial={"x": np.array([0.0, 1.0, 1.0, 0.0]), "xdot": np.zeros(4),
                 "phat": np.zeros(4), "qhat": np.zeros(4)},
    )


def scenario_vi_b() -> ScenarioConfig:
    """Absolute-measurement differentiator on ``f = 0.6 sin t + 0.25 cos 2t`` with ``l = 3``."""
    return ScenarioConfig(
        name="vi-b",
        mode="dfd_a",
        graph=surrogate_topology(),
        gains=GainSpec(k1=5.0, k2=4.0, l=3.0),
        leader=Signal.of((0.6, 1.0, "sin"), (0.25, 2.0, "cos")),
        initial={"phat": np.zeros(4), "qhat": np.zeros(4)},
    )


def scenario_vi_c() -> ScenarioConfig:
    """Continuous consensus controller with first-order followers ``s_i' = a_i + u_i``."""
    return ScenarioConfig(
        name="vi-c",
        mode="controller",
        graph=surrogate_topology(),
        gains=GainSpec(k1=8.0, k2=6.0, l=3.1),
        leader=Signal.of((1.0, 1.0, "cos"), (0.2, 0.2, "cos")),
        disturbances=(
            Signal.of((1.0, 1.5, "sin")),
            Signal.of((2.0, 1.0, "cos")),
            Signal.of((1.0, 1.5, "cos")),
            Signal.of((1.0, 0.5, "sin")),
        ),
        input_gains=(1.0, 1.0, 1.0, 1.0),
        initial={"s0": -1.0, "s": np.array([1.0, 1.5, -1.0, 2.0]), "v": np.zeros(4)},
    )


BUILTINS = {"vi-a": scenario_vi_a, "vi-b": scenario_vi_b, "vi-c": scenario_vi_c}
