"""Command-line front end: ``ballistic-green <scenario> --config <path>``.

A run is described by an INI document with an optional ``[run]`` section
(``out``, ``tol``, ``plot_script``) and one section named after the
scenario holding its physical parameters in SI units (energies in eV,
lengths in the unit named by the key). Unknown sections or keys are
rejected. Every data file is a CSV whose first line is ``#`` followed by a
JSON object describing the columns and parameters; a ``manifest.json``
records the resolved configuration, checks, library version and the time
of the run.

Exit status: 0 on success, 2 for configuration errors, 3 when a numerical
accuracy check fails.
"""
import argparse
import configparser
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
import json
import math
import os
from pathlib import Path
import sys

import numpy as np

from .errors import AccuracyError, BallisticError, DegeneracyError, ResonanceError
from .units import (ATOMIC_MASS_UNIT_SI, ELECTRON_MASS_SI, ELECTRON_VOLT_SI, ELEMENTARY_CHARGE_SI,
                    HBAR_SI, PLANCK_SI, UnitSystem, convert_units)

__all__ = ["main", "run_scenario", "load_config", "ScenarioConfig", "ConfigError", "SCHEMAS",
           "PRESETS", "UnitSystem", "convert_units"]

EXIT_OK, EXIT_CONFIG, EXIT_ACCURACY = 0, 2, 3


class ConfigError(BallisticError, ValueError):
    """Invalid scenario configuration."""


# key -> (type, default); a default of None marks an optional key
_FLOAT, _INT, _STR, _BOOL, _FLIST = "float", "int", "str", "bool", "float-list"

SCHEMAS = {
    "shutter": {
        "k": (_FLOAT, 1.0), "times": (_FLIST, "1, 5, 10"), "x_min": (_FLOAT, -10.0),
        "x_max": (_FLOAT, 30.0), "n_points": (_INT, 801),
    },
    "photodetach": {
        "electric_field_v_per_m": (_FLOAT, 1000.0), "mass_kg": (_FLOAT, ELECTRON_MASS_SI),
        "length_unit_m": (_FLOAT, 1e-8), "e_min_ev": (_FLOAT, -2e-5), "e_max_ev": (_FLOAT, 1e-4),
        "n_points": (_INT, 601),
    },
    "atomlaser": {
        "preset": (_STR, None), "mass_u": (_FLOAT, 87.0), "gravity_m_per_s2": (_FLOAT, 9.81),
        "width_a_m": (_FLOAT, 0.8e-6), "length_unit_m": (_FLOAT, 1e-6),
        "detunings_hz": (_FLIST, "500, 1000, 2000"), "z_min_m": (_FLOAT, 10e-6),
        "z_max_m": (_FLOAT, 1000e-6), "n_z": (_INT, 200001), "n_z_out": (_INT, 2001),
        "profile_detuning_hz": (_FLOAT, 500.0), "profile_z_m": (_FLOAT, 200e-6),
        "current_detuning_max_hz": (_FLOAT, 4000.0), "n_current": (_INT, 161),
    },
    "stm": {
        "preset": (_STR, None), "mass_eff": (_FLOAT, 0.38), "length_unit_m": (_FLOAT, 1e-10),
        "work_function_ev": (_FLOAT, 4.5), "barrier_slope_ev_per_unit": (_FLOAT, -0.02),
        "well_width": (_FLOAT, 3.0), "wall_height_ev": (_FLOAT, 2.0),
        "wall_absorption_ev": (_FLOAT, 0.05), "resonance_ev": (_FLOAT, -0.45),
        "flat_level_ev": (_FLOAT, None), "phase_shift": (_FLOAT, 0.5467), "energy_ev": (_FLOAT, 0.0),
        "n_atoms": (_INT, 48), "radius": (_FLOAT, 71.3), "adatoms_json": (_STR, None),
        "grid_n": (_INT, 100), "extent": (_FLOAT, 80.0), "z_near": (_FLOAT, 4.0),
        "z_far": (_FLOAT, 9.0), "z_ref": (_FLOAT, 6.0),
    },
    "qhe-dos": {
        "magnetic_field_t": (_FLOAT, 5.0), "electric_field_v_per_m": (_FLOAT, 4000.0),
        "mass_kg": (_FLOAT, ELECTRON_MASS_SI), "length_unit_m": (_FLOAT, 1e-8),
        "e_min_hw": (_FLOAT, 1.0), "e_max_hw": (_FLOAT, 11.0), "n_points": (_INT, 1001),
        "semiclassical": (_BOOL, "true"),
    },
    "qhe-resistivity": {
        "fermi_energy_ev": (_FLOAT, 0.01), "electric_field_v_per_m": (_FLOAT, 10.0),
        "mass_kg": (_FLOAT, ELECTRON_MASS_SI), "length_unit_m": (_FLOAT, 1e-8),
        "b_min_t": (_FLOAT, 1.0), "b_max_t": (_FLOAT, 10.0), "n_b": (_INT, 181),
    },
    "closed-orbits": {
        "magnetic_field_t": (_FLOAT, 5.0), "electric_field_v_per_m": (_FLOAT, 4000.0),
        "mass_kg": (_FLOAT, ELECTRON_MASS_SI), "length_unit_m": (_FLOAT, 1e-8),
        "e_min_hw": (_FLOAT, 1.0), "e_max_hw": (_FLOAT, 11.0), "n_points": (_INT, 501),
    },
}

RUN_SCHEMA = {"scenario": (_STR, None), "out": (_STR, None), "tol": (_FLOAT, None),
              "plot_script": (_BOOL, "false")}

PRESETS = {
    ("atomlaser", "rb"): {"mass_u": 87.0, "gravity_m_per_s2": 9.81, "width_a_m": 0.8e-6},
    ("stm", "cu111-corral"): {
        "mass_eff": 0.38, "length_unit_m": 1e-10, "work_function_ev": 4.5,
        "barrier_slope_ev_per_unit": -0.02, "well_width": 3.0, "wall_height_ev": 2.0,
        "wall_absorption_ev": 0.05, "resonance_ev": -0.45, "phase_shift": 0.5467,
        "energy_ev": 0.0, "n_atoms": 48, "radius": 71.3,
    },
}

DEFAULT_TOL = {"shutter": 1e-10, "photodetach": 1e-10, "atomlaser": 1e-3, "stm": 1e-12,
               "qhe-dos": 1e-6, "qhe-resistivity": 1e-3, "closed-orbits": 1e-9}


@dataclass
class ScenarioConfig:
    """Validated run description."""

    scenario: str
    params: dict
    out: Path = Path("out")
    tol: float = None
    plot_script: bool = False
    source: str = None
    checks: list = field(default_factory=list)

    def __post_init__(self):
        if self.tol is None:
            self.tol = DEFAULT_TOL[self.scenario]


def _parse(kind, raw, key):
    try:
        if kind == _FLOAT:
            return float(raw)
        if kind == _INT:
            return int(raw)
        if kind == _BOOL:
            v = str(raw).strip().lower()
            if v not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return v in ("true", "yes", "1")
        if kind == _FLIST:
            return [float(x) for x in str(raw).replace(";", ",").split(",") if x.strip()]
        return str(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot read {raw!r} as {kind}") from None


def _resolve(schema, raw, where):
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    out = {}
    for key, (kind, default) in schema.items():
        if key in raw:
            out[key] = _parse(kind, raw[key], key)
        elif default is not None:
            out[key] = _parse(kind, default, key)
        else:
            out[key] = None
    return out


def load_config(scenario, path=None, out=None, tol=None):
    """Read and validate a scenario configuration.

    Raises
    ------
    ConfigError
        Unknown scenario, section or key, unreadable value, or a ``[run]``
        scenario that contradicts the command line.
    """
    if scenario not in SCHEMAS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {sorted(SCHEMAS)}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
    extra = sorted(set(parser.sections()) - {"run", scenario})
    if extra:
        raise ConfigError(f"unexpected section(s): {', '.join(extra)}")
    run = _resolve(RUN_SCHEMA, dict(parser["run"]) if parser.has_section("run") else {}, "run")
    if run["scenario"] is not None and run["scenario"] != scenario:
        raise ConfigError(f"config is for scenario {run['scenario']!r}, not {scenario!r}")
    raw = dict(parser[scenario]) if parser.has_section(scenario) else {}
    schema = SCHEMAS[scenario]
    preset = raw.get("preset")
    if preset is not None:
        if (scenario, preset) not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r} for {scenario}")
        # explicit keys override the preset
        raw = {**{k: str(v) for k, v in PRESETS[(scenario, preset)].items()}, **raw}
    params = _resolve(schema, raw, scenario)
    for key, value in params.items():
        if isinstance(value, (int, float)) and not isinstance(value, bool) and not math.isfinite(value):
            raise ConfigError(f"key {key!r} must be finite")
    cfg = ScenarioConfig(scenario=scenario, params=params,
                         out=Path(out or run["out"] or "out"),
                         tol=tol if tol is not None else run["tol"],
                         plot_script=run["plot_script"],
                         source=None if path is None else str(path))
    _validate(cfg)
    return cfg


def _validate(cfg):
    p = cfg.params
    positive = [k for k in p if (k.startswith("n_") and k != "n_atoms") or k == "grid_n"]
    for k in positive:
        if p[k] is not None and p[k] < 2:
            raise ConfigError(f"{k} must be at least 2")
    if p.get("n_atoms") is not None and p["n_atoms"] < 0:
        raise ConfigError("n_atoms must be non-negative")
    if cfg.tol is not None and not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    for lo, hi in (("x_min", "x_max"), ("e_min_ev", "e_max_ev"), ("z_min_m", "z_max_m"),
                   ("e_min_hw", "e_max_hw"), ("b_min_t", "b_max_t"), ("z_near", "z_far")):
        if lo in p and not p[lo] < p[hi]:
            raise ConfigError(f"{lo} must be below {hi}")
    if cfg.scenario == "shutter" and (p["k"] <= 0 or any(t <= 0 for t in p["times"])):
        raise ConfigError("shutter needs k > 0 and positive times")
    if cfg.scenario in ("qhe-dos", "closed-orbits", "qhe-resistivity"):
        if p.get("electric_field_v_per_m", 1) <= 0 or p.get("magnetic_field_t", 1) <= 0:
            raise ConfigError("fields must be positive")
        if p.get("e_min_hw", 1) <= 0:
            raise ConfigError("energies must be positive")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12e}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_csv(path, columns, rows, meta):
    """CSV with a ``#``-prefixed JSON header; fixed number formatting."""
    header = {"columns": list(columns), **meta}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + json.dumps(_jsonable(header), sort_keys=True) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(meta, column names, float array)``."""
    with open(path, encoding="utf-8") as fh:
        meta = json.loads(fh.readline()[1:])
        cols = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return meta, cols, data


_PLOT_TEMPLATE = """\
# companion plot for {name}; run with python after installing matplotlib
import json
import numpy as np
import matplotlib.pyplot as plt

with open({name!r}) as fh:
    meta = json.loads(fh.readline()[1:])
    cols = fh.readline().strip().split(",")
    data = np.loadtxt(fh, delimiter=",", ndmin=2)
for j in range(1, len(cols)):
    plt.plot(data[:, 0], data[:, j], label=cols[j])
plt.xlabel(cols[0])
plt.legend()
plt.title(meta.get("scenario", ""))
plt.savefig({png!r}, dpi=150)
"""


def _plot_script(out_dir, csv_name):
    stem = Path(csv_name).stem
    path = out_dir / f"plot_{stem}.py"
    path.write_text(_PLOT_TEMPLATE.format(name=csv_name, png=f"{stem}.png"), encoding="utf-8")
    return path


def threads():
    """Worker cap from ``BG_THREADS`` (default: CPU count)."""
    raw = os.environ.get("BG_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"BG_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("BG_THREADS must be >= 1")
    return n


@contextmanager
def _executor():
    n = threads()
    if n == 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=n) as ex:
        yield ex


def _check(cfg, name, value, expected, tol, relative=False):
    err = abs(value - expected) / (abs(expected) if relative else 1.0)
    cfg.checks.append({"name": name, "value": value, "expected": expected, "error": err,
                       "tol": tol, "passed": bool(err <= tol)})


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def _crossed_cfg(p):
    from .propagator import FieldConfig
    us = UnitSystem(mass_si=p["mass_kg"], length_si=p["length_unit_m"])
    b = convert_units(p["magnetic_field_t"], "magnetic_field", "si_to_natural", us)
    f = convert_units(p["electric_field_v_per_m"], "field", "si_to_natural", us)
    return FieldConfig(force_f=f, larmor=b / 2.0), us


def _run_shutter(cfg, out):
    from .shutter import ShutterState, classical_front, shutter_density, shutter_u, shutter_wavefunction
    p = cfg.params
    st = ShutterState(k=p["k"])
    x = np.linspace(p["x_min"], p["x_max"], p["n_points"])
    rows = []
    for t in p["times"]:
        psi = shutter_wavefunction(x, t, st)
        u = shutter_u(x, t, st)
        for xi, ui, d in zip(x, u, np.abs(psi) ** 2):
            rows.append((t, xi, ui, d))
        front = classical_front(t, st)
        _check(cfg, f"front density t={t:g}", float(abs(shutter_wavefunction(front, t, st)) ** 2), 0.25, cfg.tol)
        _check(cfg, f"fresnel form t={t:g}", float(shutter_density(0.0)), 0.25, cfg.tol)
    return [write_csv(out / "shutter_density.csv", ["t", "x", "u", "density"], rows,
                      {"scenario": "shutter", "units": "natural", "k": p["k"]})]


def _run_photodetach(cfg, out):
    from .propagator import FieldConfig
    from .source import field_wigner_current
    from .specialfns import airy_ai
    p = cfg.params
    us = UnitSystem(mass_si=p["mass_kg"], length_si=p["length_unit_m"])
    f = convert_units(p["electric_field_v_per_m"], "field", "si_to_natural", us)
    beta = FieldConfig(force_f=f, larmor=0.0).beta
    e_ev = np.linspace(p["e_min_ev"], p["e_max_ev"], p["n_points"])
    e = convert_units(e_ev * ELECTRON_VOLT_SI, "energy", "si_to_natural", us)
    j_field = field_wigner_current(e, beta)
    # free law with the same large-energy normalization, sqrt(2 beta E) / pi
    j_free = np.sqrt(np.maximum(2 * beta * e, 0.0)) / math.pi
    _check(cfg, "threshold value Ai'(0)^2", float(field_wigner_current(0.0, beta)),
           float(airy_ai(0.0)[1] ** 2), cfg.tol)
    cfg.checks.append({"name": "positive below threshold", "passed": bool(np.all(j_field[e < 0] > 0))})
    rows = zip(e_ev, e, j_field, j_free)
    return [write_csv(out / "photodetach.csv", ["energy_ev", "energy_natural", "j_field", "j_free"], rows,
                      {"scenario": "photodetach", "beta": beta, "force_natural": f})]


def _run_atomlaser(cfg, out):
    from .atomlaser import (GaussianSource, beam_wavefunction, beam_wavefunction_numeric,
                            count_fringes, total_current_exact, total_current_geometric,
                            transverse_profile, virtual_source_shift)
    from .propagator import FieldConfig
    p = cfg.params
    us = UnitSystem(mass_si=p["mass_u"] * ATOMIC_MASS_UNIT_SI, length_si=p["length_unit_m"])
    force = convert_units(p["mass_u"] * ATOMIC_MASS_UNIT_SI * p["gravity_m_per_s2"], "force",
                          "si_to_natural", us)
    fc = FieldConfig(force_f=force, larmor=0.0)
    a = convert_units(p["width_a_m"], "length", "si_to_natural", us)
    src = GaussianSource(width_a=a, rabi=1.0)

    def e_of(hz):
        return convert_units(PLANCK_SI * hz, "energy", "si_to_natural", us)

    z = np.linspace(convert_units(p["z_min_m"], "length", "si_to_natural", us),
                    convert_units(p["z_max_m"], "length", "si_to_natural", us), p["n_z"])
    files = []
    counts = []
    step = max(1, (p["n_z"] - 1) // (p["n_z_out"] - 1))
    cols, dens = ["z_m"], []
    for hz in p["detunings_hz"]:
        e1, e2 = e_of(hz), e_of(-hz)
        counts.append((hz, count_fringes(z, (0.0, 0.0), e1, e2, src, fc)))
        pts = np.column_stack([np.zeros_like(z[::step]), np.zeros_like(z[::step]), z[::step]])
        psi = beam_wavefunction(pts, e1, src, fc, warn=False) + beam_wavefunction(pts, e2, src, fc, warn=False)
        cols.append(f"density_pm{hz:g}hz")
        dens.append(np.abs(psi) ** 2)
    zs = convert_units(z[::step], "length", "natural_to_si", us)
    files.append(write_csv(out / "atomlaser_longitudinal.csv", cols, zip(zs, *dens),
                           {"scenario": "atomlaser", "line": "x = y = 0"}))
    files.append(write_csv(out / "atomlaser_fringes.csv", ["detuning_hz", "fringe_count"], counts,
                           {"scenario": "atomlaser", "counting": "zero crossings of 2 Re(psi1 psi2*) / 2"}))
    # transverse profile
    zp = convert_units(p["profile_z_m"], "length", "si_to_natural", us)
    x = np.linspace(0.0, 4 * math.sqrt(max(e_of(p["profile_detuning_hz"]), a * a * force) * zp / force) + 10 * a, 1001)
    prof = transverse_profile(x, zp, e_of(p["profile_detuning_hz"]), src, fc)
    files.append(write_csv(out / "atomlaser_transverse.csv", ["x_m", "density"],
                           zip(convert_units(x, "length", "natural_to_si", us), prof),
                           {"scenario": "atomlaser", "z_m": p["profile_z_m"],
                            "detuning_hz": p["profile_detuning_hz"]}))
    # total current spectrum
    hz = np.linspace(-p["current_detuning_max_hz"], p["current_detuning_max_hz"], p["n_current"])
    jg = total_current_geometric(np.array([e_of(h) for h in hz]), src, fc)
    je = [total_current_exact(e_of(h), src, fc) for h in hz]
    files.append(write_csv(out / "atomlaser_current.csv", ["detuning_hz", "j_geometric", "j_exact"],
                           zip(hz, jg, je), {"scenario": "atomlaser", "rabi": 1.0}))
    # virtual source against the time-domain oracle
    e1 = e_of(p["detunings_hz"][0])
    for r in ((0.0, 0.0, 5 * a), (2 * a, a, 6 * a), (3 * a, 0.0, 20 * a)):
        v = beam_wavefunction(np.array(r), e1, src, fc, warn=False)
        n = beam_wavefunction_numeric(np.array(r), e1, src, fc)
        _check(cfg, f"virtual source at {r}", abs(v - n) / abs(n), 0.0, cfg.tol)
    cfg.checks.append({"name": "virtual source shift (natural units)",
                       "value": float(virtual_source_shift(src, fc)[2]), "passed": True})
    return files


def stm_setup(p):
    """Potential, lattice and energy (natural units) for an ``stm`` parameter set."""
    from .stm import (AdatomLattice, ModelPotential1D, calibrate_flat_level, circle_positions,
                      strength_from_phase_shift, with_flat_level)
    us = UnitSystem(mass_si=ELECTRON_MASS_SI, length_si=p["length_unit_m"])

    def ev(x):
        return convert_units(x * ELECTRON_VOLT_SI, "energy", "si_to_natural", us)

    zw = p["well_width"]
    base = ModelPotential1D(
        segments=[(-math.inf, 0.0, ev(p["barrier_slope_ev_per_unit"]), ev(p["work_function_ev"])),
                  (0.0, zw, 0.0, ev(p["resonance_ev"]))],
        wall_z=zw, wall_height=ev(p["wall_height_ev"]), wall_absorption=ev(p["wall_absorption_ev"]),
        surface_state_e0=ev(p["resonance_ev"]), mass=p["mass_eff"])
    if p.get("flat_level_ev") is not None:
        pot = with_flat_level(base, ev(p["flat_level_ev"]))
    else:
        target = ev(p["resonance_ev"])
        # the well floor sits a few eV below the level it binds
        pot = calibrate_flat_level(base, target, (ev(p["resonance_ev"] - 4.0), ev(p["resonance_ev"] - 0.35)))
    energy = ev(p["energy_ev"])
    if p.get("adatoms_json"):
        try:
            pos = json.loads(Path(p["adatoms_json"]).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read adatoms_json: {exc}") from None
        pos = np.asarray(pos, dtype=float).reshape(-1, 2)
    else:
        pos = circle_positions(p["n_atoms"], p["radius"]) if p["n_atoms"] > 0 else np.zeros((0, 2))
    t0 = strength_from_phase_shift(p["phase_shift"], energy, pot)
    return pot, AdatomLattice(pos, t0), energy, us


def _run_stm(cfg, out):
    from .stm import LateralGrid, build_tables, corrugation_map, t_matrix
    p = cfg.params
    pot, lat, energy, us = stm_setup(p)
    ext, n = p["extent"], p["grid_n"]
    grid = LateralGrid(-ext, ext, n, -ext, ext, n)
    zb = (-p["z_far"], -p["z_near"])
    reach = float(np.hypot(*lat.positions.T).max()) if len(lat) else 0.0
    rho_max = math.sqrt(2) * ext + reach + 1.0
    with _executor() as ex:
        tables = build_tables(energy, pot, zb, rho_max, workers=ex)
    j_target = float(-tables.background(np.array([-p["z_ref"]])).imag[0])
    tmat = t_matrix(lat, energy, pot) if len(lat) else np.zeros((0, 0))
    cm = corrugation_map(grid, j_target, energy, lat, pot, zb, tables=tables, tmat=tmat)
    X, Y = np.meshgrid(cm.x, cm.y, indexing="ij")
    files = [write_csv(out / "stm_corrugation.csv", ["x", "y", "height"],
                       zip(X.ravel(), Y.ravel(), cm.height.ravel()),
                       {"scenario": "stm", "length_unit_m": p["length_unit_m"], "n_adatoms": len(lat),
                        "flagged": int(cm.flagged.sum())})]
    binpath = out / "stm_corrugation.bin"
    np.ascontiguousarray(cm.height, dtype="<f8").tofile(binpath)
    side = {"shape": list(cm.height.shape), "dtype": "float64", "order": "row-major (x, y)",
            "x": [float(cm.x[0]), float(cm.x[-1])], "y": [float(cm.y[0]), float(cm.y[-1])],
            "length_unit_m": p["length_unit_m"], "j_target": j_target,
            "corrugation": cm.corrugation, "flat_level": pot.surface_state_e0,
            "scatter_strength": [lat.scatter_strength.real, lat.scatter_strength.imag]}
    (out / "stm_corrugation.json").write_text(json.dumps(_jsonable(side), sort_keys=True, indent=1) + "\n",
                                              encoding="utf-8")
    files += [binpath, out / "stm_corrugation.json"]
    if len(lat) == 0:
        _check(cfg, "flat map variance", float(np.nanvar(cm.height)), 0.0, cfg.tol)
    cfg.checks.append({"name": "unflagged points", "value": int((~cm.flagged).sum()),
                       "passed": bool((~cm.flagged).any())})
    return files


def _run_qhe_dos(cfg, out):
    from scipy import integrate
    from .closedorbit import dos_semiclassical, find_closed_orbits
    from .qhe import dos_curve, level_density, level_energy
    p = cfg.params
    fc, _ = _crossed_cfg(p)
    hw = fc.hbar * fc.larmor
    e = np.linspace(p["e_min_hw"], p["e_max_hw"], p["n_points"]) * hw
    tol = min(cfg.tol, 1e-12)
    curve = dos_curve(e, fc, tol=tol)
    meta = {"scenario": "qhe-dos", "b_t": p["magnetic_field_t"],
            "electric_field_v_per_m": p["electric_field_v_per_m"], "gamma": fc.gamma,
            "larmor": fc.larmor, "k_max": curve.k_max_used, "tol": tol,
            "units": "natural (hbar = m = e = 1, length unit length_unit_m)"}
    files = [write_csv(out / "qhe_dos.csv", ["energy", "n"], zip(e, curve.density), meta)]
    if p["semiclassical"]:
        sc, cnt = [], []
        for x in e:
            orbs = find_closed_orbits(x, fc)
            cnt.append(len(orbs))
            try:
                sc.append(dos_semiclassical(x, fc, orbits=orbs))
            except DegeneracyError:
                sc.append(float("nan"))
        files.append(write_csv(out / "qhe_dos_semiclassical.csv", ["energy", "n_semiclassical"],
                               zip(e, sc), meta))
        files.append(write_csv(out / "qhe_orbit_staircase.csv", ["energy", "orbit_count"],
                               zip(e, cnt), meta))
        cfg.checks.append({"name": "orbit staircase non-decreasing",
                           "passed": bool(np.all(np.diff(cnt) >= 0))})
    # every level carries eB / (2 pi hbar) states per unit area
    weight = 1.0 / (2 * math.pi * fc.magnetic_length ** 2)
    for k in range(4):
        c = float(level_energy(k, fc))
        val, _ = integrate.quad(lambda x: level_density(k, x, fc), c - 40 * fc.gamma, c + 40 * fc.gamma,
                                points=[c], limit=400, epsabs=0, epsrel=1e-12)
        _check(cfg, f"level {k} weight", val / weight, 1.0, cfg.tol, relative=True)
    return files


def _run_qhe_resistivity(cfg, out):
    from .propagator import FieldConfig
    from .qhe import classical_hall_resistivity, hall_resistivity
    p = cfg.params
    us = UnitSystem(mass_si=p["mass_kg"], length_si=p["length_unit_m"])
    f = convert_units(p["electric_field_v_per_m"], "field", "si_to_natural", us)
    e_f = convert_units(p["fermi_energy_ev"] * ELECTRON_VOLT_SI, "energy", "si_to_natural", us)
    b_t = np.linspace(p["b_min_t"], p["b_max_t"], p["n_b"])
    b = convert_units(b_t, "magnetic_field", "si_to_natural", us)
    pts = hall_resistivity(e_f, b, FieldConfig(force_f=f, larmor=1.0))
    r_unit = HBAR_SI / ELEMENTARY_CHARGE_SI ** 2
    rho = np.array([pt.rho_xy for pt in pts]) * r_unit
    rho_cl = classical_hall_resistivity(b, e_f) * r_unit
    klitzing = 2 * math.pi * r_unit
    nu = np.where(np.isfinite(rho), klitzing / rho, 0.0)
    return [write_csv(out / "qhe_resistivity.csv", ["b_t", "rho_xy_ohm", "rho_classical_ohm", "nu"],
                      zip(b_t, rho, rho_cl, nu),
                      {"scenario": "qhe-resistivity", "fermi_energy_ev": p["fermi_energy_ev"],
                       "h_over_e2_ohm": klitzing})]


def _run_closed_orbits(cfg, out):
    from .closedorbit import find_closed_orbits
    p = cfg.params
    fc, _ = _crossed_cfg(p)
    hw = fc.hbar * fc.larmor
    rows, stair = [], []
    for x in np.linspace(p["e_min_hw"], p["e_max_hw"], p["n_points"]) * hw:
        orbs = find_closed_orbits(x, fc)
        stair.append((x / hw, len(orbs)))
        for o in orbs:
            rows.append((x / hw, o.branch_k, o.time_t, o.reduced_action_w, o.sddot_sign,
                         o.amplitude.real, o.amplitude.imag))
    cfg.checks.append({"name": "orbit staircase non-decreasing",
                       "passed": bool(np.all(np.diff([s[1] for s in stair]) >= 0))})
    meta = {"scenario": "closed-orbits", "larmor": fc.larmor, "drift_v": fc.drift_v}
    return [write_csv(out / "closed_orbits.csv",
                      ["energy_over_hw", "branch", "time", "action", "sddot_sign", "amp_re", "amp_im"], rows, meta),
            write_csv(out / "closed_orbit_staircase.csv", ["energy_over_hw", "orbit_count"], stair, meta)]


_RUNNERS = {
    "shutter": _run_shutter, "photodetach": _run_photodetach, "atomlaser": _run_atomlaser,
    "stm": _run_stm, "qhe-dos": _run_qhe_dos, "qhe-resistivity": _run_qhe_resistivity,
    "closed-orbits": _run_closed_orbits,
}


def _version():
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:  # noqa: BLE001 - metadata is optional in source checkouts
        from . import __version__
        return __version__


def run_scenario(cfg):
    """Run a validated scenario; returns ``(exit status, list of output paths)``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    status, diag = EXIT_OK, None
    files = []
    try:
        files = [Path(f) for f in _RUNNERS[cfg.scenario](cfg, out)]
    except (AccuracyError, ResonanceError, DegeneracyError) as exc:
        status, diag = EXIT_ACCURACY, f"{type(exc).__name__}: {exc}"
    if status == EXIT_OK and not all(c["passed"] for c in cfg.checks):
        status = EXIT_ACCURACY
        diag = "; ".join(f"{c['name']} (error {c.get('error')})" for c in cfg.checks if not c["passed"])
    if cfg.plot_script:
        files += [_plot_script(out, f.name) for f in list(files) if f.suffix == ".csv"]
    manifest = {
        "scenario": cfg.scenario, "parameters": cfg.params, "tolerance": cfg.tol,
        "config": cfg.source, "library_version": _version(), "numpy_version": np.__version__,
        "threads": threads(), "outputs": [f.name for f in files], "checks": cfg.checks,
        "status": status, "diagnostic": diag,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), sort_keys=True, indent=1) + "\n",
                                       encoding="utf-8")
    return status, files


def main(argv=None):
    ap = argparse.ArgumentParser(prog="ballistic-green",
                                 description="Green-function scenarios for ballistic quantum motion.")
    ap.add_argument("scenario", help="one of: " + ", ".join(SCHEMAS))
    ap.add_argument("--config", required=True, help="INI file with [run] and scenario sections")
    ap.add_argument("--out", default=None, help="output directory (default: out)")
    ap.add_argument("--tol", type=float, default=None, help="tolerance for the scenario's checks")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.scenario, args.config, out=args.out, tol=args.tol)
        threads()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status, files = run_scenario(cfg)
    for f in files:
        print(f)
    if status == EXIT_ACCURACY:
        print("accuracy failure: see manifest.json", file=sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
