"""Command-line front end: config handling, dispatch, artifact output.

Every run writes a fully resolved ``config_echo.json`` next to its results
so artifacts are self-describing.  Frequencies in configs and outputs are
cyclic GHz and durations ns; the simulation core works in rad/s and s.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import experiments, reporting
from .metrics import average_gate_fidelity
from .path import (design_path, dissipation_table, ghz_to_rad, rad_to_ghz,
                   write_dissipation_csv, TWO_PI)
from .pulses import ECHOED, FLAT, RAISED_COSINE
from .system import SystemSpec, default_window, dressed_basis
from .dynamics import evolve_unitary

SCHEMA_VERSION = 1

OUTPUT_ROOT_ENV = "RCRSIM_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2

REPRODUCE_TARGETS = ("table2", "fig3", "fig4", "fig5", "fig7", "fig8")

# Tabulated gate examples: (length m, delta_a, delta_b, g GHz).
TABLE2_ROWS = (
    # (cable length m, delta_a, delta_b, g GHz, nominal gate time ns)
    # The nominal time brackets the tuning scan around the first good
    # revival; the full default range would also return later revivals.
    (0.25, 0.70, 0.30, 0.03, 169.3),
    (0.50, 1.25, 0.75, 0.03, 152.4),
    (0.50, 0.35, 0.65, 0.02, 147.3),
    (1.00, 2.55, 1.25, 0.02, 201.9),
    (1.00, 2.50, 1.20, 0.01, 385.9),
    (1.00, 1.55, 1.35, 0.01, 400.3),
)


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending field."""


# Per-command parameter schema: name -> (type, default).  ``None`` defaults
# mean "required" unless resolved dynamically.
COMMON_SYSTEM = {
    "length_m": (float, None),
    "delta_a": (float, None),
    "delta_b": (float, None),
    "g_ghz": (float, None),
    "anchor_ghz": (float, 5.0),
    "window": (list, None),      # optional [M_min, M_max]
    "n_max": (int, 3),
    "n_total": (int, 5),
    "dissipation": (bool, False),
}

SCHEMAS = {
    "design-path": {
        "length_m": (float, None),
        "anchor_ghz": (float, 5.0),
        "window": (list, None),
    },
    "tune": {
        **COMMON_SYSTEM,
        "shape": (str, ECHOED),
        "initial": (str, experiments.PHI_PLUS),
        "metric": (str, experiments.METRIC_CPLUS),
        "tau_min_ns": (float, None),
        "tau_max_ns": (float, None),
        "coarse_step_ns": (float, 2.0),
        "fidelity": (bool, False),
    },
    "sweep": {
        **{k: v for k, v in COMMON_SYSTEM.items()
           if k not in ("delta_a", "delta_b")},
        "delta_a_values": (list, None),
        "delta_b_values": (list, None),
        "shape": (str, ECHOED),
        "tau_min_ns": (float, None),
        "tau_max_ns": (float, None),
        "coarse_step_ns": (float, 2.0),
        "jobs": (int, 1),
    },
    "leakage": {
        **COMMON_SYSTEM,
        "initial": (str, "all"),
        "duration_ns": (float, 200.0),
    },
    "single-qubit": {
        **COMMON_SYSTEM,
        "tau_min_ns": (float, None),
        "tau_max_ns": (float, None),
        "coarse_step_ns": (float, 0.25),
    },
    "transfer": {
        "delta_mhz": (float, 0.0),
        "length_m": (float, 1.0),
        "anchor_ghz": (float, 5.0),
        "g_ghz": (float, 0.003),
        "n_max": (int, 3),
        "n_total": (int, 2),
        "t_max_us": (float, 5.0),
    },
    "reproduce": {
        "target": (str, None),
        "jobs": (int, 1),
        "coarse_step_ns": (float, 2.0),
        "rows": (list, None),       # optional subset of tabulated rows
    },
}

_OMITTED = ("delta_a_values", "delta_b_values", "window", "tau_min_ns",
            "tau_max_ns", "rows")


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file: top level must be an object")
    version = raw.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, "
                          f"got {version}")
    return raw


def resolve_params(command: str, file_values: dict, flag_values: dict) -> dict:
    """Merge config file and flags (flags win) against the schema."""
    schema = SCHEMAS[command]
    unknown = set(file_values) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    params = {}
    for name, (typ, default) in schema.items():
        value = flag_values.get(name)
        if value is None:
            value = file_values.get(name, default)
        if value is None:
            if default is None and name not in _OMITTED:
                raise ConfigError(f"missing required field: {name}")
            params[name] = None
            continue
        try:
            if typ is list:
                value = list(value)
            elif typ is bool:
                value = bool(value)
            else:
                value = typ(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field {name}: {exc}") from exc
        params[name] = value
    for name in ("delta_a_values", "delta_b_values"):
        if name in schema and params.get(name) is not None and not params[name]:
            raise ConfigError(f"field {name}: must be non-empty")
    return params


def _build_spec(params: dict) -> SystemSpec:
    geometry = design_path(params["length_m"],
                           omega_M=ghz_to_rad(params["anchor_ghz"]))
    window = params.get("window")
    return SystemSpec.from_fractional(
        geometry, params["delta_a"], params["delta_b"], params["g_ghz"],
        window=None if window is None else (int(window[0]), int(window[1])),
        n_max=params["n_max"], n_total=params["n_total"])


def _dissipation_for(spec: SystemSpec, enabled: bool):
    if not enabled:
        return None
    return dissipation_table(spec.geometry, list(spec.modes))


def _tau_range(params: dict) -> tuple[float, float] | None:
    lo, hi = params.get("tau_min_ns"), params.get("tau_max_ns")
    if lo is None and hi is None:
        return None
    if lo is None or hi is None:
        raise ConfigError("tau_min_ns and tau_max_ns must be given together")
    return (lo * 1e-9, hi * 1e-9)


def _write_echo(outdir: str, command: str, params: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, "command": command, **params}
    reporting.write_json(os.path.join(outdir, "config_echo.json"), payload)


def cmd_design_path(params: dict, outdir: str) -> dict:
    geometry = design_path(params["length_m"],
                           omega_M=ghz_to_rad(params["anchor_ghz"]))
    window = params.get("window")
    if window is None:
        window = (geometry.M - 2, geometry.M + 2)
    modes = list(range(int(window[0]), int(window[1]) + 1))
    write_dissipation_csv(os.path.join(outdir, "dissipation.csv"),
                          geometry, modes)
    result = {"M": geometry.M,
              "l_cable_m": geometry.l_cable,
              "l_cpw_m": geometry.l_cpw,
              "fsr_ghz": rad_to_ghz(geometry.omega_fsr),
              "anchor_ghz": rad_to_ghz(geometry.omega_M)}
    print(f"M={geometry.M}  l_cable={geometry.l_cable:.4f} m  "
          f"l_cpw={geometry.l_cpw:.4f} m  "
          f"FSR={rad_to_ghz(geometry.omega_fsr):.4f} GHz")
    return result


def cmd_tune(params: dict, outdir: str) -> dict:
    spec = _build_spec(params)
    dissipation = _dissipation_for(spec, params["dissipation"])
    result = experiments.tune_cr(
        spec, shape=params["shape"], initial=params["initial"],
        metric=params["metric"], tau_range=_tau_range(params),
        coarse_step=params["coarse_step_ns"] * 1e-9,
        dissipation=dissipation)
    reporting.write_trace_csv(
        os.path.join(outdir, "scan.csv"),
        {"tau_ns": result.scan_taus * 1e9, result.metric: result.scan_values})
    payload = result.as_dict()
    if result.boundary:
        payload["warning"] = "optimum on the scan boundary"
    if params["fidelity"]:
        basis = dressed_basis(spec)
        freq_b = basis.dressed_frequency("B", spec.geometry.omega_M)
        from .pulses import cr_program

        def run(psi0):
            program = cr_program(params["shape"], result.tau, freq_b)
            return evolve_unitary(spec, program, psi0, basis=basis).final

        fbar, info = average_gate_fidelity(run, basis)
        payload["average_gate_fidelity"] = fbar
    print(f"tau = {result.tau * 1e9:.2f} ns  {result.metric} = "
          f"{result.value:.4f}" + ("  [boundary]" if result.boundary else ""))
    return payload


def cmd_sweep(params: dict, outdir: str) -> dict:
    geometry = design_path(params["length_m"],
                           omega_M=ghz_to_rad(params["anchor_ghz"]))
    window = params.get("window")
    grid = experiments.sweep_grid(
        geometry, params["delta_a_values"], params["delta_b_values"],
        params["g_ghz"], shape=params["shape"],
        dissipation=(dissipation_table(
            geometry, list(range(geometry.M - 6, geometry.M + 7)))
            if params["dissipation"] else None),
        window=None if window is None else (int(window[0]), int(window[1])),
        n_max=params["n_max"], n_total=params["n_total"],
        tau_range=_tau_range(params),
        coarse_step=params["coarse_step_ns"] * 1e-9,
        jobs=params["jobs"])
    reporting.write_sweep_csv(os.path.join(outdir, "results.csv"), grid)
    reporting.write_sweep_svg(os.path.join(outdir, "grid.svg"), grid)
    cells = [{"delta_a": c.delta_a, "delta_b": c.delta_b, "cplus": c.cplus,
              "tau_ns": c.tau * 1e9, "band": c.band,
              "ill_defined": c.ill_defined, "error": c.error}
             for c in grid.cells]
    ok = [c for c in grid.cells if c.band]
    print(f"{len(ok)}/{len(grid.cells)} cells tuned; best C+ = "
          f"{max((c.cplus for c in ok), default=float('nan')):.4f}")
    return {"cells": cells}


def cmd_leakage(params: dict, outdir: str) -> dict:
    spec = _build_spec(params)
    dissipation = _dissipation_for(spec, params["dissipation"])
    initials = (["00", "01", "10", "11"] if params["initial"] == "all"
                else [params["initial"]])
    retained = {}
    for label in initials:
        retained[label] = experiments.leakage_test(
            spec, label, duration=params["duration_ns"] * 1e-9,
            dissipation=dissipation)
        print(f"|{label}>: retained {100 * retained[label]:.2f}%")
    return {"retained": retained, "duration_ns": params["duration_ns"]}


def cmd_single_qubit(params: dict, outdir: str) -> dict:
    spec = _build_spec(params)
    dissipation = _dissipation_for(spec, params["dissipation"])
    result = experiments.single_qubit_gate_test(
        spec, dissipation=dissipation, tau_range=_tau_range(params),
        coarse_step=params["coarse_step_ns"] * 1e-9)
    print(f"tau = {result.tau * 1e9:.2f} ns  avg fidelity = "
          f"{result.value:.4f}" + ("  [boundary]" if result.boundary else ""))
    payload = result.as_dict()
    if result.boundary:
        payload["warning"] = "optimum on the scan boundary"
    return payload


def cmd_transfer(params: dict, outdir: str) -> dict:
    geometry = design_path(params["length_m"],
                           omega_M=ghz_to_rad(params["anchor_ghz"]))
    spec = experiments.transfer_spec(
        TWO_PI * params["delta_mhz"] * 1e6, geometry=geometry,
        g_ghz=params["g_ghz"], n_max=params["n_max"],
        n_total=params["n_total"])
    result = experiments.state_transfer(spec,
                                        t_max=params["t_max_us"] * 1e-6)
    reporting.write_trace_csv(
        os.path.join(outdir, "trace.csv"),
        {"t_ns": result.times * 1e9, "p_qubit_a": result.p_qubit_a,
         "p_qubit_b": result.p_qubit_b,
         "p_anchor_mode": result.p_anchor_mode})
    payload = {"peak": result.peak, "t_peak_ns": result.t_peak * 1e9,
               "found": result.found}
    if not result.found:
        payload["warning"] = "no dominant peak found in the time window"
    print(f"peak P1(B) = {result.peak:.4f} at {result.t_peak * 1e9:.1f} ns")
    return payload


def _reproduce_table2(params: dict, outdir: str) -> dict:
    rows_sel = params.get("rows")
    rows = []
    for idx, (length, da, db, g, tau_ref_ns) in enumerate(TABLE2_ROWS):
        if rows_sel is not None and idx not in [int(r) for r in rows_sel]:
            continue
        geometry = design_path(length)
        spec = SystemSpec.from_fractional(geometry, da, db, g)
        basis = dressed_basis(spec)
        freq_b = basis.dressed_frequency("B", spec.geometry.omega_M)
        tau_ref = tau_ref_ns * 1e-9
        tune = experiments.tune_cr(
            spec, tau_range=(0.8 * tau_ref, 1.25 * tau_ref),
            coarse_step=params["coarse_step_ns"] * 1e-9)
        dissipation = dissipation_table(geometry, list(spec.modes))
        cprime = experiments.evaluate_cr(spec, ECHOED, tune.tau,
                                         dissipation=dissipation)
        from .pulses import cr_program

        def run(psi0, _tau=tune.tau):
            program = cr_program(ECHOED, _tau, freq_b)
            return evolve_unitary(spec, program, psi0, basis=basis).final

        fbar, _ = average_gate_fidelity(run, basis)
        delta_ghz = rad_to_ghz(spec.delta_A - spec.delta_B)
        row = {"length_m": length, "delta_a": da, "delta_b": db,
               "Delta_ghz": delta_ghz, "g_ghz": g,
               "tau_ns": tune.tau * 1e9, "Cplus": tune.value,
               "Fbar": fbar, "Cplus_dissipative": cprime}
        rows.append(row)
        print(f"{length:5.2f} m  dA={da:4.2f} dB={db:4.2f} g={g:5.3f}: "
              f"tau={row['tau_ns']:6.1f} ns  C+={row['Cplus']:.4f}  "
              f"Fbar={row['Fbar']:.4f}  C+'={row['Cplus_dissipative']:.4f}")
    reporting.write_trace_csv(
        os.path.join(outdir, "results.csv"),
        {k: np.array([r[k] for r in rows]) for k in rows[0]} if rows
        else {"length_m": np.array([])})
    return {"rows": rows}


_SWEEP_FIGS = {
    # target: (length, g GHz, delta_a range, delta_b range)
    "fig3": (0.25, 0.03, (0.1, 0.9), (0.1, 0.9)),
    "fig4": (0.50, 0.03, (1.1, 1.9), (0.1, 0.9)),
    "fig5": (1.00, 0.01, (2.1, 2.9), (1.1, 1.9)),
    "fig8": (1.00, 0.01, (1.1, 1.9), (1.1, 1.9)),
}


def _reproduce_sweep(target: str, params: dict, outdir: str) -> dict:
    length, g, (a0, a1), (b0, b1) = _SWEEP_FIGS[target]
    geometry = design_path(length)
    values_a = [round(a0 + 0.1 * i, 1) for i in range(int(round((a1 - a0) / 0.1)) + 1)]
    values_b = [round(b0 + 0.1 * i, 1) for i in range(int(round((b1 - b0) / 0.1)) + 1)]
    grid = experiments.sweep_grid(
        geometry, values_a, values_b, g,
        coarse_step=params["coarse_step_ns"] * 1e-9, jobs=params["jobs"])
    reporting.write_sweep_csv(os.path.join(outdir, "results.csv"), grid)
    reporting.write_sweep_svg(os.path.join(outdir, "grid.svg"), grid)
    cells = [{"delta_a": c.delta_a, "delta_b": c.delta_b, "cplus": c.cplus,
              "tau_ns": c.tau * 1e9, "band": c.band,
              "ill_defined": c.ill_defined, "error": c.error}
             for c in grid.cells]
    return {"cells": cells}


def _reproduce_transfer(params: dict, outdir: str) -> dict:
    geometry = design_path(1.0)
    curves = {}
    for delta_mhz in (0.0, 2.0, 5.0, 10.0):
        spec = experiments.transfer_spec(TWO_PI * delta_mhz * 1e6,
                                         geometry=geometry)
        result = experiments.state_transfer(spec)
        curves[f"{delta_mhz:g}MHz"] = {"peak": result.peak,
                                       "t_peak_ns": result.t_peak * 1e9,
                                       "found": result.found}
        reporting.write_trace_csv(
            os.path.join(outdir, f"trace_{delta_mhz:g}MHz.csv"),
            {"t_ns": result.times * 1e9, "p_qubit_a": result.p_qubit_a,
             "p_qubit_b": result.p_qubit_b,
             "p_anchor_mode": result.p_anchor_mode})
        print(f"Delta/2pi = {delta_mhz:4.1f} MHz: peak P1(B) = "
              f"{result.peak:.4f} at {result.t_peak * 1e9:.1f} ns")
    return {"curves": curves}


def cmd_reproduce(params: dict, outdir: str) -> dict:
    target = params["target"]
    if target not in REPRODUCE_TARGETS:
        raise ConfigError(f"target: must be one of {REPRODUCE_TARGETS}")
    if target == "table2":
        return _reproduce_table2(params, outdir)
    if target == "fig7":
        return _reproduce_transfer(params, outdir)
    return _reproduce_sweep(target, params, outdir)


COMMANDS = {
    "design-path": cmd_design_path,
    "tune": cmd_tune,
    "sweep": cmd_sweep,
    "leakage": cmd_leakage,
    "single-qubit": cmd_single_qubit,
    "transfer": cmd_transfer,
    "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcrsim",
        description="Remote cross-resonance gate simulator for fixed-"
                    "frequency qubits linked by a multimode cable.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory "
                       f"(default ${OUTPUT_ROOT_ENV} or cwd)")
        if command == "reproduce":
            p.add_argument("target_pos", nargs="?", metavar="target",
                           choices=REPRODUCE_TARGETS)
        for name, (typ, default) in schema.items():
            flag = "--" + name.replace("_", "-")
            if typ is bool:
                p.add_argument(flag, action="store_const", const=True,
                               default=None)
            elif typ is list:
                p.add_argument(flag, type=_parse_list, default=None)
            else:
                p.add_argument(flag, type=typ, default=None)
    return parser


def _parse_list(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        file_values = (load_config_file(args.config) if args.config else {})
        flag_values = {name: getattr(args, name)
                       for name in SCHEMAS[command]
                       if getattr(args, name, None) is not None}
        if command == "reproduce" and getattr(args, "target_pos", None):
            flag_values["target"] = args.target_pos
        params = resolve_params(command, file_values, flag_values)
        if command == "reproduce" and params["target"] not in REPRODUCE_TARGETS:
            raise ConfigError(f"target: must be one of {REPRODUCE_TARGETS}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = args.out or os.environ.get(OUTPUT_ROOT_ENV, ".")
    os.makedirs(outdir, exist_ok=True)
    try:
        _write_echo(outdir, command, params)
        result = COMMANDS[command](params, outdir)
        reporting.write_json(os.path.join(outdir, "results.json"),
                             {"command": command, **result})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # structured internal-error report
        report = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report), file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
