"""Command-line runner: emits the data behind the tables and figures as CSV/JSON.

Every subcommand reads an optional JSON config, fills in defaults, and embeds
the resolved config (seed included) in each file it writes, so feeding that
config back reproduces the output byte for byte.

Exit codes: 0 success, 2 invalid config, 3 infeasible request.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import output
from .controls import (
    SingleLoopSpec,
    field_columns,
    parallel_transport_residual,
    reverse_engineer,
    single_loop_area,
    single_loop_build,
    single_loop_unitary,
    two_level_schedule,
)
from .device import (
    InfeasibleDriveError,
    cp_drive_field,
    cp_gate_sim,
    transmon_drive,
    transmon_params_from_mhz,
    single_qubit_gate_sim,
    two_qubit_params_from_mhz,
)
from .dynamics import DEFAULT_STEPS, evolve_unitary, fidelity_six_state, gate_unitary, qubit_noise, trace_fidelity
from .fixtures import fixture, load_table1
from .optimize import OPT_GRID, Scenario, area_sweep, minimize
from .robustness import ErrorModel
from .trajectory import (
    CONFIGS,
    DEFAULT_GRID,
    GATES,
    GateTarget,
    _wrap,
    check_cyclicity,
    evaluate,
    normalize_tau,
    pulse_area,
    raw_phase,
)


class ConfigError(ValueError):
    pass


class Infeasible(RuntimeError):
    pass


_ANSATZ_DEFAULTS = {"case": 1, "gate": "T", "config": None, "a_theta": None, "a_phi": None,
                    "target": None, "tau": None}

DEFAULTS = {
    "synth": {**_ANSATZ_DEFAULTS, "grid": DEFAULT_GRID, "seed": 0},
    "sweep": {
        **_ANSATZ_DEFAULTS,
        "case": 2,
        "kind": "decoherence",
        "gammas": {"start": 1e-5, "stop": 1e-2, "num": 20, "log": True},
        "gamma": 5e-4,
        "eps": [0.0],
        "eta": [0.0],
        "device": {},
        "drag": True,
        "errors_before_drag": False,
        "equal_peak": False,
        "omega_m_fraction": 0.9,
        "model": "full",
        "steps": DEFAULT_STEPS,
        "grid": DEFAULT_GRID,
        "seed": 0,
    },
    "optimize": {"case": 1, "gate": "T", "target": None, "config": "T", "gamma": 1e-4, "tau": None,
                 "budget": 16000, "seed_count": 16, "polish": 2, "warm_start": None, "angles": None,
                 "steps": DEFAULT_STEPS, "grid": OPT_GRID, "seed": 0},
    "baseline": {"gate": "T", "target": None, "omega_m": 1.0, "equal_peak": False,
                 "grid": DEFAULT_GRID, "seed": 0},
    "table1": {"grid": DEFAULT_GRID, "seed": 0},
}

SWEEP_KINDS = ("decoherence", "errors", "transmon", "cp")


# ---------------------------------------------------------------- config


def resolve_config(command: str, raw: Optional[dict], seed: Optional[int] = None,
                   grid: Optional[int] = None) -> dict:
    cfg = dict(DEFAULTS[command])
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(cfg)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    cfg.update(raw)
    if seed is not None:
        cfg["seed"] = seed
    if grid is not None:
        cfg["grid"] = grid
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        raise ConfigError("seed must be an integer")
    if int(cfg["grid"]) < 100:
        raise ConfigError("grid must be at least 100")
    cfg["grid"] = int(cfg["grid"])
    if "steps" in cfg and int(cfg["steps"]) < 100:
        raise ConfigError("steps must be at least 100")
    for key in ("gamma",):
        if key in cfg and float(cfg[key]) < 0:
            raise ConfigError(f"{key} must be non-negative")
    if command == "sweep":
        if cfg["kind"] not in SWEEP_KINDS:
            raise ConfigError(f"sweep kind must be one of {SWEEP_KINDS}")
        try:
            gammas = output.grid_values(cfg["gammas"])
            output.grid_values(cfg["eps"])
            output.grid_values(cfg["eta"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad grid spec: {exc}") from exc
        if any(g < 0 for g in gammas):
            raise ConfigError("decoherence rates must be non-negative")
    return cfg


def load_config(path: Optional[str]) -> Optional[dict]:
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _target(cfg: dict) -> GateTarget:
    t = cfg.get("target")
    if t is not None:
        try:
            return GateTarget(float(t["theta0"]), float(t["phi0"]), float(t["angle"]))
        except (KeyError, TypeError) as exc:
            raise ConfigError("target needs theta0, phi0 and angle") from exc
    if cfg["gate"] not in GATES:
        raise ConfigError(f"unknown gate {cfg['gate']!r}; give a target instead")
    return GATES[cfg["gate"]]


def _ansatz(cfg: dict):
    """Trajectory parameters and target from explicit coefficients or a published row."""
    grid = cfg["grid"]
    if cfg["a_theta"] is not None or cfg["a_phi"] is not None:
        config = cfg["config"] or "T"
        if config not in CONFIGS:
            raise ConfigError(f"unknown ansatz config {config!r}")
        n = len(cfg["a_theta"] or cfg["a_phi"])
        a_theta = cfg["a_theta"] if cfg["a_theta"] is not None else [0.0] * n
        a_phi = cfg["a_phi"] if cfg["a_phi"] is not None else [0.0] * n
        tau = 1.0 if cfg["tau"] is None else float(cfg["tau"])
        if tau <= 0:
            raise ConfigError("tau must be positive")
        p = CONFIGS[config](a_theta, a_phi, tau=tau)
        if cfg["tau"] is None:
            p = normalize_tau(p, 1.0, grid)
        return p, _target(cfg)
    try:
        row = fixture(int(cfg["case"]), cfg["gate"])
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    return row.params(tau=cfg["tau"]), row.target


# ---------------------------------------------------------------- synth


def _synth_outputs(p, target, cfg: dict, out: str, prefix: str = "") -> dict:
    grid = cfg["grid"]
    field = reverse_engineer(p, grid)
    pt = evaluate(p, field.t, check_range=False)
    output.write_csv(os.path.join(out, prefix + "trajectory.csv"), ["t", "theta", "phi"],
                     zip(pt.t, pt.theta, pt.phi), cfg)
    cols = field_columns(field)
    output.write_csv(os.path.join(out, prefix + "control.csv"), list(cols),
                     zip(*cols.values()), cfg)
    cyclic, reason = check_cyclicity(p)
    phase = raw_phase(p, grid)
    area = pulse_area(p, grid)
    end = evaluate(p, np.array([0.0, p.tau]), check_range=False)
    u = gate_unitary(field, max(DEFAULT_STEPS, grid)) if field.omega_max > 0 else np.eye(2)
    summary = {
        "config": cfg,
        "seed": cfg["seed"],
        "tau": p.tau,
        "peak_amplitude": field.omega_max,
        "phase": phase,
        "target_angle": target.rotation_angle,
        "phase_residual": float(_wrap(phase - target.rotation_angle)),
        "area": area,
        "area_over_pi": area / np.pi,
        "cyclic": cyclic,
        "cyclicity": reason,
        "theta_mismatch": float(end.theta[1] - end.theta[0]),
        "phi_mismatch": float(_wrap(end.phi[1] - end.phi[0])),
        "gate_infidelity": 1.0 - trace_fidelity(u, target.unitary()),
        "omega_start": abs(field.omega[0]),
        "omega_end": abs(field.omega[-1]),
    }
    output.write_json(os.path.join(out, prefix + "summary.json"), summary)
    return summary


def cmd_synth(cfg: dict, out: str, workers: int = 1) -> int:
    p, target = _ansatz(cfg)
    _synth_outputs(p, target, cfg, out)
    return 0


# ---------------------------------------------------------------- sweep


def _sweep_point(cfg: dict, point) -> list:
    kind = cfg["kind"]
    if kind == "cp":
        params = two_qubit_params_from_mhz(cfg["device"])
        field = cp_drive_field(reverse_engineer(fixture(5, "CP").params(), cfg["grid"]), params,
                               omega_m=cfg["omega_m_fraction"] * params.max_omega)
        eps, eta = point
        return [eps, eta, cp_gate_sim(params, field, ErrorModel(eps, eta), cfg["steps"], model=cfg["model"])]

    p, target = _ansatz(cfg)
    field = reverse_engineer(p, cfg["grid"])
    ref = single_loop_build(SingleLoopSpec.for_target(target, 1.0, cfg["equal_peak"]), cfg["grid"])
    steps = cfg["steps"]
    if kind == "decoherence":
        noise = qubit_noise(point, point)
        u = target.unitary()
        return [point, fidelity_six_state(field, noise, u, steps), fidelity_six_state(ref, noise, u, steps)]
    eps, eta = point
    if kind == "errors":
        noise = qubit_noise(cfg["gamma"], cfg["gamma"])
        u = target.unitary()
        vals = [fidelity_six_state(two_level_schedule(f, eps, eta, 1.0), noise, u, steps) for f in (field, ref)]
        return [eps, eta] + vals
    params = transmon_params_from_mhz(cfg["device"])
    vals = [
        single_qubit_gate_sim(transmon_drive(f, params), params, ErrorModel(eps, eta), target,
                              drag=cfg["drag"], errors_before_drag=cfg["errors_before_drag"])
        for f in (field, ref)
    ]
    return [eps, eta] + vals


def _run_points(cfg: dict, points: list, workers: int) -> list:
    if workers <= 1 or len(points) <= 1:
        return [_sweep_point(cfg, pt) for pt in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, [cfg] * len(points), points))


def cmd_sweep(cfg: dict, out: str, workers: int = 1) -> int:
    kind = cfg["kind"]
    if kind == "decoherence":
        points = output.grid_values(cfg["gammas"])
        header = ["gamma", "ongqg", "single_loop"]
    else:
        points = [(e, n) for e in output.grid_values(cfg["eps"]) for n in output.grid_values(cfg["eta"])]
        header = ["eps", "eta", "fidelity"] if kind == "cp" else ["eps", "eta", "ongqg", "single_loop"]
    if kind == "cp":
        params = two_qubit_params_from_mhz(cfg["device"])
        if cfg["omega_m_fraction"] > 1.0 or cfg["omega_m_fraction"] <= 0:
            raise InfeasibleDriveError(
                f"omega_m_fraction must lie in (0, 1]; the coupler limit is {params.max_omega:.6g} rad/us",
                params.max_omega,
            )
    rows = _run_points(cfg, points, workers)
    output.write_csv(os.path.join(out, f"sweep_{kind}.csv"), header, rows, cfg)
    summary = {"config": cfg, "seed": cfg["seed"], "points": len(rows)}
    if rows:
        if kind == "cp":
            f = np.array([r[2] for r in rows])
            summary.update(min_fidelity=f.min(), max_fidelity=f.max(),
                           fraction_above_0995=float(np.mean(f > 0.995)),
                           fraction_above_099=float(np.mean(f > 0.99)))
        else:
            a = np.array([r[-2] for r in rows])
            b = np.array([r[-1] for r in rows])
            summary.update(ongqg_min=a.min(), single_loop_min=b.min(),
                           ongqg_wins=int(np.sum(a > b)))
    output.write_json(os.path.join(out, f"sweep_{kind}_summary.json"), summary)
    return 0


# ---------------------------------------------------------------- optimize


def cmd_optimize(cfg: dict, out: str, workers: int = 1) -> int:
    target = _target(cfg)
    if cfg["angles"] is not None:
        angles = output.grid_values(cfg["angles"])
        results = area_sweep(angles, seed=cfg["seed"], seed_count=cfg["seed_count"],
                             budget=cfg["budget"], grid=cfg["grid"])
        rows = [(a, r.objective, r.objective / np.pi, r.residual, r.success) for a, r in zip(angles, results)]
        output.write_csv(os.path.join(out, "area_vs_angle.csv"),
                         ["angle", "area", "area_over_pi", "residual", "success"], rows, cfg)
        output.write_json(os.path.join(out, "area_vs_angle.json"),
                          {"config": cfg, "seed": cfg["seed"], "results": [r.to_dict() for r in results]})
        failed = [a for a, r in zip(angles, results) if not r.success]
        if failed:
            raise Infeasible(f"no feasible solution for angles {failed}")
        return 0

    scen = Scenario(int(cfg["case"]), target, gate_name=cfg["gate"], config=cfg["config"],
                    gamma=float(cfg["gamma"]), tau=cfg["tau"], grid=cfg["grid"], steps=cfg["steps"])
    warm = cfg["warm_start"]
    if warm == "table1":
        row = fixture(scen.case, cfg["gate"])
        x0 = [list(row.a_theta) + list(row.a_phi)]
    elif warm is None:
        x0 = None
    else:
        x0 = [list(map(float, warm))]
    res = minimize(scen, cfg["seed_count"], cfg["budget"], cfg["seed"], x0=x0, polish=cfg["polish"])
    record = res.to_dict()
    record["run_config"] = cfg
    output.write_json(os.path.join(out, "result.json"), record)
    if not res.success:
        raise Infeasible(res.message)
    p = scen.params(res.coefficients)
    if scen.case == 1 and cfg["tau"] is None:
        p = normalize_tau(p, 1.0, cfg["grid"])
    _synth_outputs(p, target, cfg, out)
    return 0


# ---------------------------------------------------------------- baseline and table


def cmd_baseline(cfg: dict, out: str, workers: int = 1) -> int:
    target = _target(cfg)
    if float(cfg["omega_m"]) <= 0:
        raise ConfigError("omega_m must be positive")
    spec = SingleLoopSpec.for_target(target, float(cfg["omega_m"]), bool(cfg["equal_peak"]))
    field = single_loop_build(spec, cfg["grid"])
    cols = field_columns(field)
    output.write_csv(os.path.join(out, "baseline_control.csv"), list(cols), zip(*cols.values()), cfg)
    u_num = evolve_unitary(two_level_schedule(field), max(DEFAULT_STEPS, cfg["grid"]))
    u_closed = single_loop_unitary(spec)
    summary = {
        "config": cfg,
        "seed": cfg["seed"],
        "theta_c": spec.theta_c,
        "phi": spec.phi,
        "gamma": spec.gamma,
        "T": spec.T,
        "T1": spec.T1,
        "T2": spec.T2,
        "area": single_loop_area(spec, cfg["grid"]),
        "closed_form_error": float(np.max(np.abs(u_num - u_closed))),
        "gate_infidelity": 1.0 - trace_fidelity(u_closed, target.unitary()),
    }
    output.write_json(os.path.join(out, "baseline_summary.json"), summary)
    return 0


def cmd_table1(cfg: dict, out: str, workers: int = 1) -> int:
    grid = cfg["grid"]
    rows = []
    for row in load_table1():
        p = row.params()
        field = reverse_engineer(p, grid)
        u = gate_unitary(field, max(DEFAULT_STEPS, grid))
        area = pulse_area(p, grid) / np.pi
        printed = float("nan") if row.s_over_pi is None else row.s_over_pi
        rows.append((row.case, row.gate, row.config, printed, area, raw_phase(p, grid),
                     1.0 - trace_fidelity(u, row.target.unitary()),
                     parallel_transport_residual(p, grid)))
    header = ["case", "gate", "config", "printed_area_over_pi", "area_over_pi", "phase",
              "gate_infidelity", "parallel_transport"]
    output.write_csv(os.path.join(out, "table1.csv"), header, rows, cfg)
    worst = max(abs(r[3] - r[4]) for r in rows if not np.isnan(r[3]))
    output.write_json(os.path.join(out, "table1_summary.json"),
                      {"config": cfg, "seed": cfg["seed"], "rows": len(rows),
                       "max_area_deviation_over_pi": worst,
                       "max_gate_infidelity": max(r[6] for r in rows)})
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "baseline": cmd_baseline,
    "table1": cmd_table1,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geogates", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "trajectory, control and summary for one coefficient set",
        "sweep": "fidelity over decoherence rates or error grids",
        "optimize": "search ansatz coefficients for a scenario",
        "baseline": "single-loop reference drive",
        "table1": "check the published coefficient rows",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, help="random seed (overrides config)")
        p.add_argument("--grid", type=int, help="integration grid size, >= 100 (overrides config)")
        p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, load_config(args.config), args.seed, args.grid)
        output.ensure_dir(args.out)
        return COMMANDS[args.command](cfg, args.out, max(1, args.workers))
    except (InfeasibleDriveError, Infeasible) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
