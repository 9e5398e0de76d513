"""Command-line interface: batch runs emitting CSV or JSON data files.

Every output starts with a header recording the subcommand, the fully
resolved configuration and library versions. Passing that output file back
through ``--config`` reproduces it.

Exit codes: 0 success, 1 Monte-Carlo result outside its tolerance band,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy
import yaml

from . import __version__
from .analysis import crossover_scan, optimize_n6, spot_check
from .core import CA40_MASS, PhysicalSystem
from .errors import (
    ConfigError,
    InvalidParameterError,
    NoCrossingError,
    NumericError,
    ShuttleNoiseError,
    SingularStateError,
)
from .noise import OU, Flicker, sample_path
from .presets import PRESETS
from .sensitivity import g2_quadrature, sensitivities
from .stochastic import default_step, run_monte_carlo
from .trajectory import Ansatz, make_poly5, make_trajectory

COMMANDS = ("trajectory", "sensitivity", "montecarlo", "crossover", "optimize-n6", "noise-sample")
OUTPUT_DIR_ENV = "SHUTTLENOISE_OUTPUT_DIR"

DEFAULTS = {
    "mass": CA40_MASS,
    "omega0": 2 * math.pi * 1.41e6,
    "distance": 280e-6,
    "mode": 0,
    "trajectories": ["poly5"],
    "n6": 0.0,
    "noise": "ou",
    "tau": [0.1],
    "tau1": 80.0,
    "tau2": 100.0,
    "T": [5.0],
    "method": "auto",
    "lambda": 0.01,
    "realizations": 4000,
    "seed": 20240601,
    "dt": None,
    "samples": 201,
    "format": None,
    "output": None,
    "workers": None,
    "dump_realizations": None,
    "preset": None,
}


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def system(self) -> PhysicalSystem:
        try:
            return PhysicalSystem(
                mass=float(self["mass"]),
                omega0=float(self["omega0"]),
                distance=float(self["distance"]),
                mode=int(self["mode"]),
            )
        except (InvalidParameterError, TypeError, ValueError) as exc:
            raise ConfigError(f"system parameters: {exc}") from exc

    def grid(self, key) -> list:
        grid_def = self[key]
        if isinstance(grid_def, (int, float)):
            return [float(grid_def)]
        if isinstance(grid_def, list):
            return [float(v) for v in grid_def]
        if isinstance(grid_def, dict):
            extra = set(grid_def) - {"start", "stop", "num", "log"}
            if extra:
                raise ConfigError(f"{key}: unknown grid keys {sorted(extra)}")
            try:
                start, stop, num = float(grid_def["start"]), float(grid_def["stop"]), int(grid_def["num"])
            except KeyError as exc:
                raise ConfigError(f"{key}: grid needs start, stop and num") from exc
            if num < 1 or start <= 0 or stop < start:
                raise ConfigError(f"{key}: need 0 < start <= stop and num >= 1")
            make = np.geomspace if grid_def.get("log", False) else np.linspace
            return [float(v) for v in make(start, stop, num)]
        raise ConfigError(f"{key}: expected a number, list or grid mapping")

    def noise_models(self, period: float) -> list:
        kind = self["noise"]
        if kind == "ou":
            return [OU(t * period) for t in self.grid("tau")]
        if kind == "flicker":
            return [Flicker(float(self["tau1"]) * period, float(self["tau2"]) * period)]
        raise ConfigError(f"noise: expected 'ou' or 'flicker', got {kind!r}")

    def trajectories(self) -> list:
        names = self["trajectories"]
        if isinstance(names, str):
            names = [names]
        try:
            return [Ansatz(n) for n in names]
        except ValueError as exc:
            raise ConfigError(f"trajectories: {exc}") from exc


# ---------------------------------------------------------------------------
# configuration loading


def _read_config_file(path: str) -> tuple:
    """Returns (command or None, mapping)."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    if text.startswith("#"):
        command, cfg = None, None
        for line in text.splitlines():
            if not line.startswith("#"):
                break
            if line.startswith("# command: "):
                command = line[len("# command: "):].strip()
            elif line.startswith("# config: "):
                cfg = json.loads(line[len("# config: "):])
        if cfg is None:
            raise ConfigError(f"{path!r} has a header block without a config line")
        return command, cfg
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path!r} must hold a mapping")
    if "config" in data and "command" in data:
        return data["command"], data["config"]
    return data.pop("command", None), data


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"--set {key}: {exc}") from exc
    return out


def resolve_config(command: str, args) -> RunConfig:
    values = dict(DEFAULTS)
    layers = []
    if args.config:
        file_command, file_cfg = _read_config_file(args.config)
        if file_command and file_command != command:
            raise ConfigError(f"config file is for {file_command!r}, not {command!r}")
        layers.append(file_cfg)
    flags = _parse_set(args.set)
    for key in ("preset", "format", "output", "workers", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            flags[key] = val
    if getattr(args, "dump_realizations", None):
        flags["dump_realizations"] = args.dump_realizations
    preset = flags.get("preset") or next((l.get("preset") for l in layers if l.get("preset")), None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
        preset_cfg = dict(PRESETS[preset])
        if preset_cfg.pop("command") != command:
            raise ConfigError(f"preset {preset!r} belongs to {PRESETS[preset]['command']!r}")
        layers.insert(0, preset_cfg)
    layers.append(flags)
    for layer in layers:
        unknown = set(layer) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        values.update(layer)
    if values["format"] is None:
        values["format"] = "json" if command == "montecarlo" else "csv"
    if values["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {values['format']!r}")
    cfg = RunConfig(command, values)
    cfg.system()
    return cfg


# ---------------------------------------------------------------------------
# output


def _versions() -> dict:
    return {
        "shuttlenoise": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(cfg: RunConfig, columns: list, rows: list, extra: dict | None = None) -> str:
    if cfg["format"] == "json":
        doc = {"command": cfg.command, "config": cfg.values, "versions": _versions()}
        if extra:
            doc.update(extra)
        if columns:
            doc["columns"] = columns
            doc["rows"] = rows
        return json.dumps(doc, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# command: {cfg.command}\n")
    buf.write(f"# config: {json.dumps(cfg.values, sort_keys=True)}\n")
    buf.write(f"# versions: {json.dumps(_versions(), sort_keys=True)}\n")
    for key, val in (extra or {}).items():
        buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def output_path(cfg: RunConfig) -> str:
    if cfg["output"]:
        return cfg["output"]
    name = cfg.command + (f"-{cfg['preset']}" if cfg["preset"] else "")
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), f"{name}.{cfg['format']}")


def write(cfg: RunConfig, text: str, stream=None) -> str:
    path = output_path(cfg)
    if path == "-":
        (stream or sys.stdout).write(text)
        return path
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _pool_map(func, items, workers):
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(i) for i in items]


# ---------------------------------------------------------------------------
# commands


def cmd_trajectory(cfg: RunConfig):
    sysp = cfg.system()
    t0 = sysp.period
    cols = ["trajectory", "T", "t", "t_over_T0", "q_c", "qc_dot", "qc_ddot", "q0", "f"]
    rows = []
    n_samples = int(cfg["samples"])
    if n_samples < 2:
        raise ConfigError("samples must be at least 2")
    for ansatz in cfg.trajectories():
        for T in cfg.grid("T"):
            T_s = T * t0
            traj = make_trajectory(ansatz, T_s, sysp.distance, float(cfg["n6"]) * sysp.distance / T_s**6)
            t = np.linspace(0.0, T_s, n_samples)
            q = traj.eval(t, 0)
            v = traj.eval(t, 1)
            a = traj.eval(t, 2)
            q0 = traj.trap_position(t, sysp.omega0)
            f = np.cos(sysp.omega0 * t) * traj.accel_autocorr(t)
            for i in range(n_samples):
                rows.append([ansatz.value, T_s, float(t[i]), float(t[i] / t0), float(q[i]),
                             float(v[i]), float(a[i]), float(q0[i]), float(f[i])])
    return cols, rows, None


def _sensitivity_point(args):
    model, ansatz, T_s, n6_scaled, sysp, method = args
    traj = make_trajectory(ansatz, T_s, sysp.distance, n6_scaled * sysp.distance / T_s**6)
    if method == "auto" and not (isinstance(model, OU) and traj.ansatz is Ansatz.POLY5):
        method = "Quadrature"
    return sensitivities(model, traj, sysp, method)


def cmd_sensitivity(cfg: RunConfig):
    sysp = cfg.system()
    t0 = sysp.period
    models = cfg.noise_models(t0)
    method = cfg["method"]
    if method in ("exact", "closed"):
        method = "OUExact"
    elif method == "quadrature":
        method = "Quadrature"
    elif method != "auto":
        raise ConfigError(f"method must be auto, exact or quadrature, got {method!r}")
    points = []
    for model in models:
        for ansatz in cfg.trajectories():
            for T in cfg.grid("T"):
                points.append((model, ansatz, T * t0, float(cfg["n6"]), sysp, method))
    try:
        results = _pool_map(_sensitivity_point, points, cfg["workers"])
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    flicker = cfg["noise"] == "flicker"
    cols = ["T", "T_over_T0"]
    cols += ["tau1", "tau2"] if flicker else ["tau", "tau_over_T0"]
    cols += ["trajectory", "G1", "G2", "method"]
    rows = []
    for (model, ansatz, T_s, *_), g in zip(points, results):
        row = [T_s, T_s / t0]
        row += [model.tau1, model.tau2] if flicker else [model.tau, model.tau / t0]
        row += [ansatz.value, g.g1, g.g2, g.method.value]
        rows.append(row)
    return cols, rows, None


def cmd_montecarlo(cfg: RunConfig):
    sysp = cfg.system()
    t0 = sysp.period
    model = cfg.noise_models(t0)[0]
    T_s = cfg.grid("T")[0] * t0
    ansatz = cfg.trajectories()[0]
    traj = make_trajectory(ansatz, T_s, sysp.distance, float(cfg["n6"]) * sysp.distance / T_s**6)
    dt = cfg["dt"]
    dt = default_step(model, sysp.omega0) if dt is None else float(dt) * t0
    lam = float(cfg["lambda"])
    try:
        report = run_monte_carlo(traj, model, lam, int(cfg["realizations"]), int(cfg["seed"]),
                                 sysp, dt=dt, workers=cfg["workers"],
                                 predict=True, keep_samples=bool(cfg["dump_realizations"]))
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    data = report.to_dict()
    data["within_band"] = report.within_band()
    data["band"] = "3 standard errors + 5% of predicted"
    if cfg["dump_realizations"]:
        with open(cfg["dump_realizations"], "w", newline="") as fh:
            fh.write("index,excitation\n")
            for i, e in enumerate(report.excitations):
                fh.write(f"{i},{float(e)!r}\n")
    return [], [], {"report": data}


def cmd_crossover(cfg: RunConfig):
    sysp = cfg.system()
    t0 = sysp.period
    taus = [t * t0 for t in cfg.grid("tau")]
    try:
        parts = _pool_map(_crossover_one, [(tau, sysp) for tau in taus], cfg["workers"])
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    cols = ["tau", "tau_over_T0", "t_cross", "t_cross_over_T0", "t_opt", "t_opt_over_T0",
            "multiplicity", "flag"]
    rows = []
    for p in parts:
        rows.append([p.tau, p.tau / t0, p.t_cross, p.t_cross / t0, p.t_opt, p.t_opt / t0,
                     p.multiplicity, p.flag])
    spot_check(parts, sysp.mode, sysp, count=5, seed=int(cfg["seed"]))
    return cols, rows, None


def _crossover_one(args):
    tau, sysp = args
    return crossover_scan([tau], sysp.mode, sysp, spot_checks=0)[0]


def _n6_point(args):
    T_s, tau, sysp = args
    n6, g2min = optimize_n6(T_s, tau, sysp)
    g2p5 = g2_quadrature(OU(tau), make_poly5(T_s, sysp.distance), sysp, rtol=1e-10)
    return n6, g2min, g2p5


def cmd_optimize_n6(cfg: RunConfig):
    sysp = cfg.system()
    t0 = sysp.period
    pts = [(T * t0, tau * t0, sysp) for T in cfg.grid("T") for tau in cfg.grid("tau")]
    results = _pool_map(_n6_point, pts, cfg["workers"])
    cols = ["T", "T_over_T0", "tau", "tau_over_T0", "n6", "n6_scaled", "G2_min", "G2_poly5",
            "relative_improvement"]
    rows = []
    for (T_s, tau, _), (n6, g2min, g2p5) in zip(pts, results):
        rows.append([T_s, T_s / t0, tau, tau / t0, n6, n6 * T_s**6 / sysp.distance,
                     g2min, g2p5, (g2p5 - g2min) / g2p5])
    return cols, rows, None


def cmd_noise_sample(cfg: RunConfig):
    sysp = cfg.system()
    t0 = sysp.period
    model = cfg.noise_models(t0)[0]
    T_s = cfg.grid("T")[0] * t0
    dt = cfg["dt"]
    dt = default_step(model, sysp.omega0) if dt is None else float(dt) * t0
    try:
        path = sample_path(model, T_s, dt, int(cfg["seed"]), omega0=sysp.omega0)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [[float(t), float(x)] for t, x in zip(path.times, path.samples)]
    extra = {"path": {"dt": path.dt, "seed": path.seed, "tau_drawn": path.tau_drawn}}
    return ["t", "xi"], rows, extra


HANDLERS = {
    "trajectory": cmd_trajectory,
    "sensitivity": cmd_sensitivity,
    "montecarlo": cmd_montecarlo,
    "crossover": cmd_crossover,
    "optimize-n6": cmd_optimize_n6,
    "noise-sample": cmd_noise_sample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shuttlenoise",
        description="Excitation of a shuttled trapped particle under spring-constant noise.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} computation")
        p.add_argument("--config", help="YAML/JSON config file or a previous output file")
        p.add_argument("--preset", help=f"named preset ({', '.join(sorted(PRESETS))})")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration key (repeatable); times in T0 units")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--output", "-o", help="output file, '-' for stdout")
        p.add_argument("--workers", type=int, help="worker processes (default: all CPUs)")
        p.add_argument("--seed", type=int)
        if name == "montecarlo":
            p.add_argument("--dump-realizations", metavar="CSV",
                           help="write per-realization excitations to this file")
    return parser


def main(argv=None, stdout=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    err = sys.stderr
    try:
        cfg = resolve_config(args.command, args)
        cols, rows, extra = HANDLERS[args.command](cfg)
        text = render(cfg, cols, rows, extra)
        path = write(cfg, text, stdout)
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return 2
    except (NumericError, SingularStateError, NoCrossingError) as exc:
        print(f"numeric failure: {exc}", file=err)
        return 3
    except InvalidParameterError as exc:
        print(f"config error: {exc}", file=err)
        return 2
    except ShuttleNoiseError as exc:
        print(f"error: {exc}", file=err)
        return 3
    if path != "-":
        print(f"wrote {path}", file=err)
    if args.command == "montecarlo" and not extra["report"]["within_band"]:
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
