"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 topology assumption violated, 4 divergence.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .gains import check_gains, derived_constants, minimal_gains
from .graph import (AssumptionViolation, DegenerateSpectrum, GraphError, assumption_violations,
                    graph_certificate, is_strongly_connected, random_graph)
from .sim.integrate import DivergenceError
from .sim.run import run_scenario
from .sim.scenario import BUILTINS, ConfigError, GainSpec, ScenarioConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_DIVERGED = 0, 2, 3, 4

SWEEPABLE = {"dt", "t_end", "tol", "window", "k1", "k2", "rho"}


def resolve_config(source: str) -> ScenarioConfig:
    if source in BUILTINS:
        return BUILTINS[source]()
    return load_config(source)


def apply_flags(config: ScenarioConfig, args) -> ScenarioConfig:
    return config.with_overrides(dt=args.dt, t_end=args.t_end, tol=args.tol,
                                 window=args.window, decimate=args.decimate)


def _override(config: ScenarioConfig, key: str, value: float) -> ScenarioConfig:
    if key in ("k1", "k2", "rho"):
        g = config.gains
        fields = {"k1": g.k1, "k2": g.k2, "auto": g.auto, "rho": g.rho, "l": g.l, "l1": g.l1}
        fields[key] = value
        if key in ("k1", "k2"):
            fields["auto"] = False
        return config.with_overrides(gains=GainSpec(**fields))
    return config.with_overrides(**{key: value})


def parse_sweep(text: str) -> tuple[str, list[float]]:
    key, _, values = text.partition("=")
    key = key.strip().replace("-", "_")
    if key not in SWEEPABLE or not values:
        raise ConfigError(f"sweep must look like KEY=v1,v2,... with KEY in {sorted(SWEEPABLE)}",
                          "/sweep")
    try:
        return key, [float(v) for v in values.split(",")]
    except ValueError:
        raise ConfigError(f"bad sweep values {values!r}", "/sweep") from None


def _fmt(x) -> str:
    if x is None:
        return "none"
    return f"{x:.6g}"


def print_summary(s) -> None:
    gc = s.gain_certification
    print(f"scenario {s.scenario} ({s.mode}, n={s.n}, dt={s.dt:g}, t_end={s.t_end:g})")
    print(f"  lambda1(G)          {s.lambda1:.6g}")
    print(f"  gains k1, k2        {s.gains['k1']:.6g}, {s.gains['k2']:.6g}  [{gc['status']}]")
    print(f"  k1 margin           {gc['k1_margin']:+.6g} (min {gc['k1_min']:.6g})")
    print(f"  k2 margin           {gc['k2_margin']:+.6g} (min {gc['k2_min']:.6g})")
    ct = s.convergence_time
    print(f"  convergence e/z/all {_fmt(ct['e'])} / {_fmt(ct['z'])} / {_fmt(ct['both'])}"
          f"  (tol {s.tol:g}, window {s.window:g})")
    st = s.settling
    print(f"  settling bound      {st['bound']:.6g} (V0 {st['V0']:.6g})")
    ly = s.lyapunov
    if ly:
        print(f"  decrease violations {ly['violations']} of {ly['samples_checked']}"
              f" (slack {ly['slack']:.3g}, floor {ly['v_floor']:g})")
    if s.diverged_at is not None:
        print(f"  DIVERGED at t={s.diverged_at:.6g}")
    for kind, path in s.outputs.items():
        print(f"  wrote {kind:<8} {path}")


def cmd_run(args) -> int:
    config = apply_flags(resolve_config(args.config), args)
    out_root = Path(args.out or os.environ.get("DFD_OUT_DIR", "dfd_out"))
    runs = [(config, out_root)]
    if args.sweep:
        key, values = parse_sweep(args.sweep)
        runs = [(_override(config, key, v), out_root / f"{key}={v:g}") for v in values]
    status = EXIT_OK
    for cfg, out in runs:
        try:
            summary, _ = run_scenario(cfg, out)
        except DivergenceError as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = EXIT_DIVERGED
            continue
        print_summary(summary)
    return status


def cmd_certify(args) -> int:
    if args.random_n:
        rng = np.random.default_rng(args.seed)
        graph = random_graph(args.random_n, rng)
        spec = GainSpec(auto=True, rho=args.rho, l=args.l, l1=0.0)
        print(f"random graph n={graph.n} seed={args.seed}")
        print("A =", np.array2string(graph.A, precision=3))
        print("b =", np.array2string(graph.b, precision=3))
    else:
        if args.config is None:
            raise ConfigError("need a config path, builtin name, or --random-n", "/")
        config = resolve_config(args.config)
        graph, spec = config.graph, config.gains
    sc = is_strongly_connected(graph)
    print(f"strongly connected: {'yes' if sc else 'no'}")
    problems = assumption_violations(graph)
    if problems:
        print("verdict: topology assumption violated: " + "; ".join(problems))
        return EXIT_ASSUMPTION
    cert = graph_certificate(graph)
    print("verdict: topology assumption holds")
    print("w =", np.array2string(cert.w, precision=6))
    print(f"lambda1(G) = {cert.lambda1:.6g}")
    if args.random_n:
        l, l1 = args.l, 0.0
    else:
        l_sig, l1_sig = config.default_bounds()
        l = l_sig if spec.l is None else spec.l
        l1 = l1_sig if spec.l1 is None else spec.l1
    c = derived_constants(spec.rho, cert.w, l, l1)
    print(f"rho={c.rho:g} l={c.l:g} l1={c.l1:g} l2={c.l2:g}")
    print(f"gamma0={c.gamma0:.6g} gamma1={c.gamma1:.6g} gamma2={c.gamma2:.6g}")
    if spec.auto:
        gs = minimal_gains(c, cert.lambda1)
        k1, k2 = gs.k1, gs.k2
        print(f"minimal gains: k1={k1:.6g} k2={k2:.6g}")
    else:
        k1, k2 = spec.k1, spec.k2
    if k1 > 0 and k2 > 0:
        r = check_gains(k1, k2, c, cert.lambda1)
        print(f"k1={k1:.6g} margin {r.k1_margin:+.6g} (needs >= {r.k1_min:.6g})")
        print(f"k2={k2:.6g} margin {r.k2_margin:+.6g} (needs >= {r.k2_min:.6g})")
        print("gains: " + ("certified" if r.certified else "uncertified but simulable"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dfd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a config file or builtin scenario (vi-a, vi-b, vi-c)")
    r.add_argument("config")
    r.add_argument("--dt", type=float)
    r.add_argument("--t-end", type=float)
    r.add_argument("--tol", type=float)
    r.add_argument("--window", type=float)
    r.add_argument("--decimate", type=int)
    r.add_argument("--out", help="output directory (default $DFD_OUT_DIR or ./dfd_out)")
    r.add_argument("--sweep", help="KEY=v1,v2,... one run per value, each in OUT/KEY=v")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("certify", help="graph and gain certificate without simulating")
    c.add_argument("config", nargs="?")
    c.add_argument("--random-n", type=int, help="certify a random strongly connected graph instead")
    c.add_argument("--seed", type=int, default=0, help="seed for --random-n")
    c.add_argument("--rho", type=float, default=0.75)
    c.add_argument("--l", type=float, default=1.0, help="disturbance bound for --random-n")
    c.set_defaults(func=cmd_certify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AssumptionViolation, DegenerateSpectrum) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (GraphError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
