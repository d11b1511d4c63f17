"""Command-line entry point: simulate / optimize / sweep / hankel.

Runs are described by a strict-keys JSON document; flags override the
corresponding config fields.  All numerical output goes to files in the
output directory (CSV for grids and traces, JSON for scalar results); the
only thing printed to standard output is a single summary line.  Exit
codes: 0 success, 2 configuration/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import hankel as hk
from .errors import (
    NonFiniteField,
    NoConvergence,
    ParseError,
    RamemError,
    ValidationError,
)
from .fwm import support_width
from .model import (
    PhysicalParams,
    SignalPulse,
    derive_couplings,
    gaussian_signal,
    make_waveform,
    square_signal,
)
from .optimize import (
    DEConfig,
    GAUSSIAN_CT,
    SPLINE_N,
    MemoryObjectiveContext,
    de_optimize,
    make_memory_objective,
)
from .scaledtime import from_normalized_frame, scaled_time_map
from .solver import (
    BACKWARD,
    DIRECTIONS,
    MODE_FULL,
    MODE_IDEAL,
    MODES,
    full_memory,
    solve_normalized,
)

SCHEMA_VERSION = 1

COMMANDS = ("simulate", "optimize", "sweep", "hankel")

_TOP_KEYS = {
    "command", "physical", "signal", "write_waveform", "read_waveform",
    "grid", "mode", "direction", "seed", "output_dir", "de", "sweep",
    "noise_floor", "power_iteration",
}
_PHYSICAL_KEYS = {"d", "delta_s", "delta_hf", "w_write", "w_read"}
_SIGNAL_KEYS = {"kind", "center", "duration", "start", "energy", "n_iter", "tol"}
_WAVEFORM_KEYS = {"kind", "start", "center", "duration", "amplitude",
                  "times", "amplitudes", "t_window"}
_DE_KEYS = {"population", "generations", "f_weight", "cr", "stall_tol",
            "stall_window", "parametrization", "bounds", "knots"}
_SWEEP_KEYS = {"parameter", "values"}
_POWER_KEYS = {"n_iter", "tol"}

_SWEEPABLE = {
    "physical.d", "physical.delta_s", "physical.delta_hf",
    "physical.w_write", "physical.w_read", "physical.control_energy",
    "signal.energy", "noise_floor",
}

_DEFAULTS = {
    "signal": {"kind": "gaussian", "center": 0.5, "duration": 0.15, "energy": 1.0},
    "write_waveform": {"kind": "square", "start": 0.0, "duration": 1.0,
                       "amplitude": 1.0, "t_window": [0.0, 1.0]},
    "read_waveform": {"kind": "square", "start": 0.0, "duration": 1.0,
                      "amplitude": 1.0, "t_window": [0.0, 1.0]},
    "grid": [512, 512],
    "mode": MODE_IDEAL,
    "direction": BACKWARD,
    "seed": 0,
    "output_dir": "ramem_out",
    "noise_floor": 0.0,
    "power_iteration": {"n_iter": 400, "tol": 1e-9},
}


@dataclass
class RunConfig:
    """Validated run description; `raw` keeps the merged document."""

    command: str
    physical: dict
    signal: dict
    write_waveform: dict
    read_waveform: dict
    grid: tuple
    mode: str
    direction: str
    seed: int
    output_dir: str
    noise_floor: float
    power_iteration: dict
    de: dict | None
    sweep: dict | None
    raw: dict


def _reject_unknown(section: dict, allowed: set, path: str):
    for key in section:
        if key not in allowed:
            raise ValidationError(f"unknown key {path}{key!r}")


def _require(cond, message):
    if not cond:
        raise ValidationError(message)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration with defaults applied."""
    return validate_config(_parse_json(text))


def _parse_json(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def validate_config(doc) -> RunConfig:
    """Validate a decoded configuration document (strict keys, defaults)."""
    if not isinstance(doc, dict):
        raise ValidationError("configuration must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "")

    command = doc.get("command")
    _require(command in COMMANDS, f"command must be one of {COMMANDS}, got {command!r}")
    _require("physical" in doc, "missing required section 'physical'")

    phys = doc["physical"]
    _reject_unknown(phys, _PHYSICAL_KEYS, "physical.")
    for key in ("d", "delta_s", "delta_hf"):
        _require(key in phys, f"physical.{key} is required")
        _require(isinstance(phys[key], (int, float)), f"physical.{key} must be a number")
    phys = {"w_write": 1.0, "w_read": 1.0, **phys}

    signal = {**_DEFAULTS["signal"], **doc.get("signal", {})}
    _reject_unknown(doc.get("signal", {}), _SIGNAL_KEYS, "signal.")
    _require(signal["kind"] in ("gaussian", "square", "matched"),
             f"signal.kind must be gaussian, square, or matched, got {signal['kind']!r}")
    _require(isinstance(signal["energy"], (int, float)) and signal["energy"] > 0,
             "signal.energy must be a positive number")
    if signal["kind"] != "matched":
        _require(isinstance(signal["duration"], (int, float)) and signal["duration"] > 0,
                 "signal.duration must be a positive number")

    wave_specs = {}
    for name in ("write_waveform", "read_waveform"):
        spec = {**_DEFAULTS[name], **doc.get(name, {})}
        _reject_unknown(doc.get(name, {}), _WAVEFORM_KEYS, f"{name}.")
        _require(spec["kind"] in ("square", "gaussian", "spline"),
                 f"{name}.kind must be square, gaussian, or spline")
        wave_specs[name] = spec

    grid = doc.get("grid", _DEFAULTS["grid"])
    _require(isinstance(grid, (list, tuple)) and len(grid) == 2
             and all(isinstance(v, int) and v > 0 for v in grid),
             "grid must be a pair of positive integers")

    mode = doc.get("mode", _DEFAULTS["mode"])
    _require(mode in MODES, f"mode must be one of {MODES}, got {mode!r}")
    direction = doc.get("direction", _DEFAULTS["direction"])
    _require(direction in DIRECTIONS,
             f"direction must be one of {DIRECTIONS}, got {direction!r}")

    seed = doc.get("seed", _DEFAULTS["seed"])
    _require(isinstance(seed, int) and seed >= 0, "seed must be a non-negative integer")

    noise_floor = doc.get("noise_floor", _DEFAULTS["noise_floor"])
    _require(isinstance(noise_floor, (int, float)) and noise_floor >= 0,
             "noise_floor must be a non-negative number")

    power = {**_DEFAULTS["power_iteration"], **doc.get("power_iteration", {})}
    _reject_unknown(doc.get("power_iteration", {}), _POWER_KEYS, "power_iteration.")

    de = doc.get("de")
    if command == "optimize":
        _require(isinstance(de, dict), "optimize requires a 'de' section")
        _reject_unknown(de, _DE_KEYS, "de.")
        _require(de.get("parametrization", GAUSSIAN_CT) in (GAUSSIAN_CT, SPLINE_N),
                 "de.parametrization must be gaussian_ct or spline_n")
    elif de is not None:
        _reject_unknown(de, _DE_KEYS, "de.")

    sweep = doc.get("sweep")
    if command == "sweep":
        _require(isinstance(sweep, dict), "sweep requires a 'sweep' section")
        _reject_unknown(sweep, _SWEEP_KEYS, "sweep.")
        _require(sweep.get("parameter") in _SWEEPABLE,
                 f"sweep.parameter must be one of {sorted(_SWEEPABLE)}")
        values = sweep.get("values")
        _require(isinstance(values, list) and len(values) > 0
                 and all(isinstance(v, (int, float)) for v in values),
                 "sweep.values must be a non-empty list of numbers")

    return RunConfig(
        command=command,
        physical=phys,
        signal=signal,
        write_waveform=wave_specs["write_waveform"],
        read_waveform=wave_specs["read_waveform"],
        grid=(int(grid[0]), int(grid[1])),
        mode=mode,
        direction=direction,
        seed=int(seed),
        output_dir=doc.get("output_dir", _DEFAULTS["output_dir"]),
        noise_floor=float(noise_floor),
        power_iteration=power,
        de=de,
        sweep=sweep,
        raw=doc,
    )


def _build_waveform(spec: dict):
    spec = dict(spec)
    kind = spec.pop("kind")
    window = tuple(spec.pop("t_window"))
    return make_waveform(kind, spec, window)


def _build_signal(config: RunConfig, wave_w, params: PhysicalParams):
    spec = config.signal
    n_t = max(config.grid[1], 257)
    t_grid = np.linspace(wave_w.t_window[0], wave_w.t_window[1], n_t)
    if spec["kind"] == "gaussian":
        return gaussian_signal(spec["center"], spec["duration"], spec["energy"], t_grid)
    if spec["kind"] == "square":
        start = spec.get("start", wave_w.t_window[0])
        return square_signal(start, spec["duration"], spec["energy"], t_grid)
    # matched: power-iteration optimal input mapped back to the raw frame
    couplings = derive_couplings(params, params.w_write)
    result = hk.optimal_mode_power_iteration(
        couplings.g,
        config.grid,
        n_iter=int(spec.get("n_iter", config.power_iteration["n_iter"])),
        direction=config.direction,
        tol=float(spec.get("tol", config.power_iteration["tol"])),
    )
    wave = wave_w.scaled(params.w_write)
    mp = scaled_time_map(wave, n_t)
    p_uniform = np.linspace(0.0, 1.0, config.grid[1])
    mode = result.mode.astype(complex)
    b_on_map = np.interp(mp.p_grid, p_uniform, mode.real) + 1j * np.interp(
        mp.p_grid, p_uniform, mode.imag
    )
    b_on_map[mp.omega <= mp.floor] = 0.0
    raw = from_normalized_frame(b_on_map, None, None, wave, couplings, map=mp, z=0.0)
    envelope = raw.e_s
    intensity = np.abs(envelope) ** 2
    half = intensity > 0.5 * intensity.max()
    fwhm = float(t_grid[half][-1] - t_grid[half][0]) if half.any() else math.nan
    pulse = SignalPulse(t_grid, envelope, fwhm)
    return pulse.scaled(spec.get("energy", 1.0))


def _fmt(value) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(value))


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _result_payload(config: RunConfig, result, params: PhysicalParams) -> dict:
    couplings_w = derive_couplings(params, params.w_write)
    couplings_r = derive_couplings(params, params.w_read)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "mode": config.mode,
        "direction": config.direction,
        "grid": list(config.grid),
        "physical": {
            "d": params.d, "delta_s": params.delta_s, "delta_hf": params.delta_hf,
            "w_write": params.w_write, "w_read": params.w_read,
        },
        "couplings": {
            "write": {"g_s": couplings_w.g_s, "g_a": couplings_w.g_a,
                      "g": couplings_w.g, "delta_k": couplings_w.delta_k,
                      "xi": couplings_w.xi},
            "read": {"g_s": couplings_r.g_s, "g_a": couplings_r.g_a,
                     "g": couplings_r.g, "delta_k": couplings_r.delta_k,
                     "xi": couplings_r.xi},
        },
        "result": {
            "eta_w": result.eta_w,
            "eta_r": result.eta_r,
            "eta_total": result.eta_total,
            "epsilon": result.epsilon,
            "n_in": result.n_in,
            "n_r": result.n_r,
            "n_a": result.n_a,
            "n_a_estimate": result.n_a_estimate,
            "mu1": result.mu1,
            "leak": result.write.leak,
            "residual": result.read.residual,
            "support_width": support_width(result.write.s_w),
        },
    }


def _run_full_memory(config: RunConfig):
    params = PhysicalParams(**config.physical)
    wave_w = _build_waveform(config.write_waveform)
    wave_r = _build_waveform(config.read_waveform)
    signal = _build_signal(config, wave_w, params)
    result = full_memory(
        params, wave_w, wave_r, signal, config.grid,
        mode=config.mode, direction=config.direction,
        noise_floor=config.noise_floor,
    )
    return params, result


def _cmd_simulate(config: RunConfig, out: Path) -> str:
    params, result = _run_full_memory(config)
    payload = _result_payload(config, result, params)
    with open(out / "result.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    ev = result.write.evolution
    n_z, n_p = config.grid
    rows_z = np.repeat(ev.z_grid, n_p)
    rows_p = np.tile(ev.p_grid, n_z)
    _write_csv(
        out / "fields.csv",
        ("z", "p", "abs_s", "abs_as", "abs_aa"),
        zip(rows_z, rows_p, np.abs(ev.s).ravel(), np.abs(ev.a_s).ravel(),
            np.abs(ev.a_a_dag).ravel()),
    )
    return (f"simulate: eta_total={result.eta_total:.6f} "
            f"epsilon={result.epsilon:.6f} -> {out / 'result.json'}")


def _cmd_optimize(config: RunConfig, out: Path) -> str:
    params = PhysicalParams(**config.physical)
    wave_w = _build_waveform(config.write_waveform)
    wave_r = _build_waveform(config.read_waveform)
    signal = _build_signal(config, wave_w, params)
    de = config.de
    parametrization = de.get("parametrization", GAUSSIAN_CT)
    window = tuple(config.write_waveform["t_window"])
    if "bounds" in de:
        bounds = tuple((float(lo), float(hi)) for lo, hi in de["bounds"])
    elif parametrization == GAUSSIAN_CT:
        span = window[1] - window[0]
        bounds = ((window[0] + 0.02 * span, window[1] - 0.02 * span),
                  (0.01 * span, 0.5 * span))
    else:
        bounds = tuple((0.0, 2.0) for _ in range(int(de.get("knots", 8))))
    ctx = MemoryObjectiveContext(
        physical=params, signal=signal, read_waveform=wave_r,
        t_window=window, grid=config.grid, mode=config.mode,
        direction=config.direction, noise_floor=config.noise_floor,
    )
    cfg = DEConfig(
        bounds=bounds,
        population=int(de.get("population", 24)),
        generations=int(de.get("generations", 60)),
        f_weight=float(de.get("f_weight", 0.7)),
        cr=float(de.get("cr", 0.9)),
        seed=config.seed,
        stall_tol=float(de.get("stall_tol", 1e-4)),
        stall_window=int(de.get("stall_window", 8)),
    )
    result = de_optimize(make_memory_objective(parametrization, ctx), cfg)
    _write_csv(
        out / "de_trace.csv",
        ("generation", "best_eta", "best_epsilon", "mean_eta"),
        ((r.generation, r.best_eta, r.best_epsilon, r.mean_eta) for r in result.trace),
    )
    if parametrization == GAUSSIAN_CT:
        center, duration = result.best_params
        best_wave = make_waveform(
            "gaussian", dict(center=center, duration=duration, amplitude=1.0), window
        )
    else:
        knots = np.linspace(window[0], window[1], result.best_params.size)
        best_wave = make_waveform(
            "spline", dict(times=knots, amplitudes=result.best_params), window
        )
    best_wave = best_wave.scaled(params.w_write)
    ts = np.linspace(window[0], window[1], 1025)
    _write_csv(out / "best_waveform.csv", ("t", "omega"), zip(ts, best_wave.omega(ts)))
    return (f"optimize: best_eta={result.best_eta:.6f} "
            f"generations={len(result.trace) - 1} ({result.terminated_by}) "
            f"-> {out / 'de_trace.csv'}")


def _set_path(doc: dict, dotted: str, value):
    if dotted == "physical.control_energy":
        # one laser drives both stages: sweep write and read energy together
        doc.setdefault("physical", {})["w_write"] = value
        doc["physical"]["w_read"] = value
        return
    parts = dotted.split(".")
    node = doc
    for key in parts[:-1]:
        node = node.setdefault(key, {})
    node[parts[-1]] = value


def _cmd_sweep(config: RunConfig, out: Path) -> str:
    axis = config.sweep["parameter"]
    values = config.sweep["values"]

    def one(value):
        doc = copy.deepcopy(config.raw)
        doc["command"] = "simulate"
        doc.pop("sweep", None)
        _set_path(doc, axis, value)
        row_config = validate_config(doc)
        _, result = _run_full_memory(row_config)
        return (value, result.eta_total, result.epsilon, result.n_a)

    try:
        workers = int(os.environ.get("RAMEM_THREADS", "1"))
    except ValueError as exc:
        raise ValidationError(f"RAMEM_THREADS must be an integer: {exc}") from exc
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, values))
    else:
        rows = [one(v) for v in values]
    _write_csv(out / "sweep.csv", ("axis", "eta", "epsilon", "n_a"), rows)
    return f"sweep: {len(rows)} rows over {axis} -> {out / 'sweep.csv'}"


def _cmd_hankel(config: RunConfig, out: Path) -> str:
    params = PhysicalParams(**config.physical)
    wave_w = _build_waveform(config.write_waveform)
    signal = _build_signal(config, wave_w, params)
    couplings = derive_couplings(params, params.w_write)
    n_z, n_p = config.grid
    from .scaledtime import resample_to_uniform, to_normalized_frame

    wave = wave_w.scaled(params.w_write)
    mp = scaled_time_map(wave, signal.t_grid.size)
    norm = to_normalized_frame(signal.envelope, None, None, wave, couplings, map=mp)
    a_in = resample_to_uniform(norm.p_samples, norm.a_s, n_p)

    g = couplings.g
    ev = solve_normalized(couplings, a_in, None, None, config.grid, MODE_IDEAL)
    b_raster, s_raster = hk.analytic_fields(a_in, None, g, config.grid)
    diff = {
        "schema_version": SCHEMA_VERSION,
        "g": g,
        "grid": list(config.grid),
        "rel_l2_s": float(np.linalg.norm(ev.s - s_raster) / np.linalg.norm(s_raster)),
        "rel_l2_b": float(np.linalg.norm(ev.b - b_raster) / np.linalg.norm(b_raster)),
    }
    with open(out / "oracle_diff.json", "w", encoding="utf-8") as fh:
        json.dump(diff, fh, indent=2)
        fh.write("\n")
    k_grid = np.linspace(0.0, 1.0, n_z)
    spectrum = hk.hankel_spectrum(ev.s[:, -1], hk.AXIS_SPATIAL, g, k_grid)
    _write_csv(
        out / "spectrum.csv",
        ("k", "re", "im"),
        zip(k_grid, spectrum.values.real, spectrum.values.imag),
    )
    return (f"hankel: rel_l2_s={diff['rel_l2_s']:.3e} "
            f"rel_l2_b={diff['rel_l2_b']:.3e} -> {out / 'spectrum.csv'}")


_DISPATCH = {
    "simulate": _cmd_simulate,
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "hankel": _cmd_hankel,
}


def run_command(config: RunConfig) -> str:
    """Execute a validated run and return the one-line summary."""
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"output directory not writable: {exc}") from exc
    return _DISPATCH[config.command](config, out)


def _apply_overrides(config_doc, args) -> dict:
    if not isinstance(config_doc, dict):
        raise ValidationError("configuration must be a JSON object")
    doc = dict(config_doc)
    if args.out is not None:
        doc["output_dir"] = args.out
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.grid is not None:
        try:
            n_z, n_p = (int(v) for v in args.grid.lower().split("x"))
        except ValueError:
            raise ValidationError(f"--grid must look like 512x512, got {args.grid!r}")
        doc["grid"] = [n_z, n_p]
    if args.mode is not None:
        doc["mode"] = {"ideal": MODE_IDEAL, "fwm": MODE_FULL}[args.mode]
    return doc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ramem",
        description="Raman-memory simulator: write/read dynamics, FWM noise, "
                    "and control-pulse optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to the JSON run config")
        cmd.add_argument("--out", default=None, help="output directory override")
        cmd.add_argument("--seed", type=int, default=None, help="RNG seed override")
        cmd.add_argument("--grid", default=None, help="grid override, e.g. 512x512")
        cmd.add_argument("--mode", choices=("ideal", "fwm"), default=None,
                         help="dynamics mode override")
    args = parser.parse_args(argv)

    try:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from exc
        doc = _apply_overrides(_parse_json(text), args)
        doc["command"] = args.command
        config = validate_config(doc)
        summary = run_command(config)
    except (NonFiniteField, NoConvergence) as exc:
        _fail(exc)
        return 3
    except RamemError as exc:
        _fail(exc)
        return 2
    print(summary)
    return 0


def _fail(exc: Exception):
    message = str(exc).replace("\n", " ")
    sys.stderr.write(f"error: {type(exc).__name__}: {message}\n")


if __name__ == "__main__":
    sys.exit(main())
