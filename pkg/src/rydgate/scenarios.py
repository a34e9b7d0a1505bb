"""Declarative experiment runner: configs, sweeps, presets and emission.

A scenario is a JSON document describing one gate simulation plus up to
two sweep axes.  Schema (defaults in brackets):

    {
      "units": "omega-prime-relative" | "two-pi-mhz",
      "atoms": 3 | 4,
      "with_leakage": false,
      "params": {<name>: <number>, ...},          # scalars for expressions
      "drives": {
        "omega_prime": <number>,                  # the reference Rabi frequency
        "delta": <number | expr>,
        "omega1": <number | expr>,
        "omega2": <number | expr>,
        "omega_dprime": <number | expr> [omega_prime],
        "omega_ctrl3": <number | expr> [omega_prime]
      },
      "interactions": {                           # exactly one key
        "relative": {"U12": "Delta / 8", "U13": "Delta", ...},
        "matrix": [[0, u12, ...], ...],
        "geometry": {"c6_thz_um6": <number>, "c6_is_angular": false,
                     "positions_um": [[x, y], ...]}
      },
      "decay": null | {"gamma": <number>,
                       "unit": "khz" | "omega-prime" | "per-us",
                       "channels": "two" | "three",
                       "conserve_total_rate": true},
      "integrator": {"method": "rk4", "dt_us": null,
                     "rel_tol": 1e-8, "abs_tol": 1e-11},
      "sweep": [ {"label": <str>, "path": "drives.omega1",
                  "values": [..] | "start"/"stop"/"num"/"spacing"},
                 {"label": <str>, "cases": [{"name": ..,
                  "overrides": {<path>: <value>, ...}}, ...]} ],
      "outputs": {"fidelity": true, "effective_fidelity": false,
                  "populations": null | {"initial": <state>,
                                          "track": [<state>, ...],
                                          "include_effective": false}}
    }

Units: in ``two-pi-mhz`` every frequency-valued number is an ordinary
frequency in MHz and is multiplied by 2*pi on load; in
``omega-prime-relative`` ``drives.omega_prime`` is given in units of
2*pi rad/us and every other frequency-valued number is a multiple of
omega_prime.  Decay rates carry their own unit ("khz" means an inverse
lifetime, not an angular rate).  String values are arithmetic
expressions over numbers, ``OmegaPrime``, ``Delta`` and the ``params``
keys; they evaluate directly in internal units (rad/us).

State names for populations: a computational bit string ("110",
"1110"), or "probe-psi" / "probe-phi" for the four-qubit transfer
probes.
"""

from __future__ import annotations

import ast
import copy
import csv
import json
import math
import operator
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, metrics, model as model_mod
from .dynamics import IntegrationError, IntegratorConfig, extract_channel, gate_time
from .model import (
    DecayModel,
    DriveParams,
    InteractionGraph,
    SystemModel,
    full_hamiltonian_terms,
    hamiltonian_effective,
    ideal_gate,
    jump_operators,
)
from .spaces import build_space, computational_subspace

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SweepResult",
    "ResolvedPoint",
    "run_scenario",
    "preset",
    "preset_names",
    "preset_description",
    "emit",
    "load_result",
    "fidelity_time_series",
    "population_time_series",
    "THREADS_ENV_VAR",
]

TWO_PI = 2.0 * math.pi
SCHEMA_VERSION = 1
THREADS_ENV_VAR = "RYDGATE_THREADS"
DRIFT_FLAG_THRESHOLD = 1e-5

# default van der Waals coefficient (ordinary THz um^6) of the Rydberg
# level assumed by the experimental presets
DEFAULT_C6_THZ_UM6 = 37.6946


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the field."""


_BIN_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY_OPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval_expr(text: str, names: dict) -> float:
    """Evaluate a small arithmetic expression over named scalars."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                return float(names[node.id])
            raise ConfigError(f"unknown name {node.id!r} in expression {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
            return _BIN_OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPS:
            return _UNARY_OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"unsupported syntax in expression {text!r}")

    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc}") from None
    return ev(tree)


def _get_path(data: dict, path: str):
    node = data
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown parameter path {path!r}")
        node = node[key]
    return node


def _set_path(data: dict, path: str, value) -> None:
    keys = path.split(".")
    node = data
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown parameter path {path!r}")
        node = node[key]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"unknown parameter path {path!r}")
    node[keys[-1]] = value


_UNITS = ("omega-prime-relative", "two-pi-mhz")
_GAMMA_UNITS = ("khz", "omega-prime", "per-us")


def _normalize(data: dict) -> dict:
    """Validate a raw config dict and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    cfg = copy.deepcopy(data)
    units = cfg.get("units")
    if units not in _UNITS:
        raise ConfigError(f"units: must be one of {_UNITS}, got {units!r}")
    atoms = cfg.get("atoms")
    if atoms not in (3, 4):
        raise ConfigError(f"atoms: must be 3 or 4, got {atoms!r}")
    cfg.setdefault("with_leakage", False)
    cfg.setdefault("params", {})
    if not isinstance(cfg["params"], dict):
        raise ConfigError("params: must be an object")
    drives = cfg.get("drives")
    if not isinstance(drives, dict):
        raise ConfigError("drives: required object")
    for key in ("omega_prime", "delta", "omega1", "omega2"):
        if key not in drives:
            raise ConfigError(f"drives.{key}: required")
    if not isinstance(drives["omega_prime"], (int, float)):
        raise ConfigError("drives.omega_prime: must be a number (it anchors the unit system)")
    drives.setdefault("omega_dprime", None)
    drives.setdefault("omega_ctrl3", None)
    inter = cfg.get("interactions")
    if not isinstance(inter, dict):
        raise ConfigError("interactions: required object")
    forms = [k for k in ("relative", "matrix", "geometry") if k in inter]
    if len(forms) != 1:
        raise ConfigError(
            "interactions: exactly one of 'relative', 'matrix' or 'geometry' must be present"
        )
    cfg.setdefault("decay", None)
    if cfg["decay"] is not None:
        dec = cfg["decay"]
        if not isinstance(dec, dict) or "gamma" not in dec:
            raise ConfigError("decay: must be null or an object with 'gamma'")
        dec.setdefault("unit", "khz")
        if dec["unit"] not in _GAMMA_UNITS:
            raise ConfigError(f"decay.unit: must be one of {_GAMMA_UNITS}")
        dec.setdefault("channels", "two")
        dec.setdefault("conserve_total_rate", True)
    integ = cfg.setdefault("integrator", {})
    integ.setdefault("method", "rk4")
    integ.setdefault("dt_us", None)
    integ.setdefault("rel_tol", 1e-8)
    integ.setdefault("abs_tol", 1e-11)
    sweep = cfg.setdefault("sweep", [])
    if not isinstance(sweep, list) or len(sweep) > 2:
        raise ConfigError("sweep: must be a list of at most two axes")
    for i, axis in enumerate(sweep):
        where = f"sweep[{i}]"
        if not isinstance(axis, dict):
            raise ConfigError(f"{where}: must be an object")
        if "cases" in axis:
            axis.setdefault("label", "case")
            for j, case in enumerate(axis["cases"]):
                if "name" not in case or "overrides" not in case:
                    raise ConfigError(f"{where}.cases[{j}]: needs 'name' and 'overrides'")
                for path in case["overrides"]:
                    _get_path(cfg, path)
        elif "path" in axis:
            _get_path(cfg, axis["path"])
            axis.setdefault("label", axis["path"].rsplit(".", 1)[-1])
            if "values" in axis:
                axis["values"] = [float(v) for v in axis["values"]]
            else:
                for key in ("start", "stop", "num"):
                    if key not in axis:
                        raise ConfigError(f"{where}: needs 'values' or start/stop/num")
                axis.setdefault("spacing", "linear")
                if axis["spacing"] not in ("linear", "log"):
                    raise ConfigError(f"{where}.spacing: must be 'linear' or 'log'")
        else:
            raise ConfigError(f"{where}: needs either 'path' or 'cases'")
    outputs = cfg.setdefault("outputs", {})
    outputs.setdefault("fidelity", True)
    outputs.setdefault("effective_fidelity", False)
    outputs.setdefault("fidelity_max", False)
    outputs.setdefault("populations", None)
    outputs.setdefault("compensate_drive_phases", True)
    pops = outputs["populations"]
    if pops is not None:
        if not isinstance(pops, dict) or "initial" not in pops or "track" not in pops:
            raise ConfigError("outputs.populations: needs 'initial' and 'track'")
        pops.setdefault("include_effective", False)
    return cfg


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario description (wraps the normalized dict)."""

    data: dict
    name: str | None = None

    @classmethod
    def from_dict(cls, data: dict, name: str | None = None) -> "ScenarioConfig":
        return cls(data=_normalize(data), name=name)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        return cls.from_dict(raw, name=os.path.basename(str(path)))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def with_overrides(self, overrides: dict) -> "ScenarioConfig":
        data = copy.deepcopy(self.data)
        for path, value in (overrides or {}).items():
            _set_path(data, path, value)
        return ScenarioConfig(data=data, name=self.name)

    @property
    def sweep_axes(self) -> list:
        return self.data["sweep"]

    @property
    def outputs(self) -> dict:
        return self.data["outputs"]


@dataclass(frozen=True)
class ResolvedPoint:
    """Everything needed to simulate one grid point."""

    model: SystemModel
    jumps: list
    integrator: IntegratorConfig
    t_gate: float
    outputs: dict


def _axis_points(axis: dict) -> list[tuple[object, dict]]:
    """Expand one sweep axis into (display value, overrides) pairs."""
    if "cases" in axis:
        return [(case["name"], dict(case["overrides"])) for case in axis["cases"]]
    if "values" in axis:
        values = axis["values"]
    elif axis.get("spacing") == "log":
        values = np.geomspace(axis["start"], axis["stop"], int(axis["num"])).tolist()
    else:
        values = np.linspace(axis["start"], axis["stop"], int(axis["num"])).tolist()
    return [(v, {axis["path"]: v}) for v in values]


def resolve_point(config: ScenarioConfig) -> ResolvedPoint:
    """Build the physical model and integrator for a (non-swept) config."""
    cfg = config.data
    units = cfg["units"]
    drives_cfg = cfg["drives"]
    omega_prime = float(drives_cfg["omega_prime"]) * TWO_PI
    # in relative units omega_prime anchors the scale; everything else
    # is a multiple of it, while two-pi-mhz numbers are MHz * 2*pi
    def convert(value: float) -> float:
        return value * TWO_PI if units == "two-pi-mhz" else value * omega_prime

    names = {"OmegaPrime": omega_prime}
    for key, val in cfg["params"].items():
        if not isinstance(val, (int, float)):
            raise ConfigError(f"params.{key}: must be a number")
        names[key] = float(val)

    def field_value(section: str, key: str, extra_names: dict) -> float | None:
        raw = cfg[section][key] if section else cfg[key]
        if raw is None:
            return None
        if isinstance(raw, str):
            return _eval_expr(raw, extra_names)
        if isinstance(raw, (int, float)):
            return convert(float(raw))
        raise ConfigError(f"{section}.{key}: must be a number, expression or null")

    delta = field_value("drives", "delta", names)
    names["Delta"] = delta
    try:
        drives = DriveParams(
            omega_prime=omega_prime,
            omega1=field_value("drives", "omega1", names),
            omega2=field_value("drives", "omega2", names),
            delta=delta,
            omega_dprime=field_value("drives", "omega_dprime", names),
            omega_ctrl3=field_value("drives", "omega_ctrl3", names),
        )
    except ValueError as exc:
        raise ConfigError(f"drives: {exc}") from None

    n_atoms = cfg["atoms"]
    space = build_space(n_atoms, with_leakage=bool(cfg["with_leakage"]))

    inter_cfg = cfg["interactions"]
    if "relative" in inter_cfg:
        pairs = {}
        for key, raw in inter_cfg["relative"].items():
            if not (len(key) == 3 and key[0] == "U" and key[1:].isdigit()):
                raise ConfigError(f"interactions.relative.{key}: keys look like 'U12'")
            j, k = int(key[1]) - 1, int(key[2]) - 1
            if not (0 <= j < k < n_atoms):
                raise ConfigError(f"interactions.relative.{key}: atom pair out of range")
            if isinstance(raw, str):
                pairs[(j, k)] = _eval_expr(raw, names)
            else:
                pairs[(j, k)] = convert(float(raw))
        graph = InteractionGraph.from_pairs(n_atoms, pairs)
    elif "matrix" in inter_cfg:
        mat = np.asarray(inter_cfg["matrix"], dtype=float)
        graph = InteractionGraph(u=np.vectorize(convert)(mat))
    else:
        geo = inter_cfg["geometry"]
        c6 = float(geo.get("c6_thz_um6", DEFAULT_C6_THZ_UM6)) * 1e6  # THz -> MHz
        if not geo.get("c6_is_angular", False):
            c6 *= TWO_PI
        positions = np.asarray(geo["positions_um"], dtype=float)
        graph = model_mod.interactions_from_geometry(
            model_mod.Geometry(c6=c6, positions=positions)
        )
    if graph.n_atoms != n_atoms:
        raise ConfigError("interactions: matrix size does not match atom count")

    decay_cfg = cfg["decay"]
    decay = None
    if decay_cfg is not None:
        gamma = float(decay_cfg["gamma"])
        unit = decay_cfg["unit"]
        if unit == "khz":
            gamma *= 1e-3  # kHz inverse lifetime -> 1/us
        elif unit == "omega-prime":
            gamma *= omega_prime
        try:
            decay = DecayModel(
                gamma=gamma,
                channels=decay_cfg["channels"],
                conserve_total_rate=bool(decay_cfg["conserve_total_rate"]),
            )
        except ValueError as exc:
            raise ConfigError(f"decay: {exc}") from None

    try:
        system = SystemModel(space=space, drives=drives, interactions=graph, decay=decay)
        jumps = jump_operators(system) if (decay is not None and decay.gamma > 0) else []
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    integ = cfg["integrator"]
    try:
        icfg = IntegratorConfig(
            method=integ["method"],
            dt=integ["dt_us"],
            rel_tol=float(integ["rel_tol"]),
            abs_tol=float(integ["abs_tol"]),
        )
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}") from None

    t_gate = gate_time(drives.omega1, drives.omega2)
    return ResolvedPoint(
        model=system, jumps=jumps, integrator=icfg, t_gate=t_gate, outputs=cfg["outputs"]
    )


def _named_ket(name: str, point: ResolvedPoint) -> tuple[str, np.ndarray]:
    """Resolve a state name to (short column tag, full-space ket)."""
    space = point.model.space
    cmap = computational_subspace(space)
    if name in ("probe-psi", "probe-phi"):
        if space.n_atoms != 4:
            raise ConfigError(f"state {name!r} needs a 4-atom register")
        probe = metrics.four_qubit_probe()
        comp = probe.psi_init if name == "probe-psi" else probe.phi_target
        tag = name.split("-", 1)[1]
    elif len(name) == space.n_atoms and set(name) <= {"0", "1"}:
        comp = np.zeros(2**space.n_atoms, dtype=complex)
        comp[int(name, 2)] = 1.0
        tag = name
    else:
        raise ConfigError(f"unknown state name {name!r}")
    full = np.zeros(space.dim, dtype=complex)
    full[cmap.index_array()] = comp
    return tag, full


def _compensation_full(point: ResolvedPoint, t: float) -> np.ndarray:
    """Full-space diagonal phase factors of the drive-phase re-referencing."""
    space = point.model.space
    cmap = computational_subspace(space)
    factors = np.ones(space.dim, dtype=complex)
    factors[cmap.index_array()] = model_mod.drive_phase_compensation(point.model, t)
    return factors


def _compensate_state(state: np.ndarray, factors_full: np.ndarray) -> np.ndarray:
    if state.ndim == 1:
        return state * factors_full
    return (factors_full[:, None] * state) * factors_full.conj()[None, :]


def _fidelity_trace(point: ResolvedPoint, n_samples: int, effective: bool = False):
    """(times, fbar) of the decay-free dynamics across the gate window."""
    if point.jumps:
        raise ConfigError("time-resolved fidelity sampling requires a decay-free scenario")
    space = point.model.space
    cmap = computational_subspace(space)
    h = hamiltonian_effective(point.model) if effective else full_hamiltonian_terms(point.model)
    times, maps = dynamics.unitary_channel_samples(
        h, cmap, point.t_gate, point.integrator, n_samples=n_samples
    )
    if bool(point.outputs["compensate_drive_phases"]) and not effective:
        maps = [
            m.with_output_phases(model_mod.drive_phase_compensation(point.model, float(t)))
            for t, m in zip(times, maps)
        ]
    target = ideal_gate(space.n_atoms)
    fbars = np.array([metrics.average_fidelity(m, target).fbar for m in maps])
    return times, fbars


def _evaluate_point(config: ScenarioConfig) -> dict:
    point = resolve_point(config)
    out = point.outputs
    space = point.model.space
    cmap = computational_subspace(space)
    compensate = bool(out["compensate_drive_phases"])
    row: dict = {}
    drift = 0.0

    if out["fidelity"]:
        terms = full_hamiltonian_terms(point.model)
        chan = extract_channel(terms, point.jumps, cmap, point.t_gate, point.integrator)
        if compensate:
            chan = chan.with_output_phases(
                model_mod.drive_phase_compensation(point.model, point.t_gate)
            )
        fid = metrics.average_fidelity(chan, ideal_gate(space.n_atoms))
        row["fbar"] = fid.fbar
        drift = max(drift, chan.drift)
    if out["fidelity_max"]:
        _, fbars = _fidelity_trace(point, n_samples=150)
        row["fbar_max"] = float(np.max(fbars))
    if out["effective_fidelity"]:
        # the effective dynamics has no control drive, hence no phase to remove
        h_eff = hamiltonian_effective(point.model)
        chan = extract_channel(h_eff, point.jumps, cmap, point.t_gate, point.integrator)
        fid = metrics.average_fidelity(chan, ideal_gate(space.n_atoms))
        row["fbar_effective"] = fid.fbar
        drift = max(drift, chan.drift)
    pops_cfg = out["populations"]
    if pops_cfg is not None:
        _, psi0 = _named_ket(pops_cfg["initial"], point)
        track = {tag: ket for tag, ket in (_named_ket(n, point) for n in pops_cfg["track"])}
        sources = [("", full_hamiltonian_terms(point.model), compensate)]
        if pops_cfg["include_effective"]:
            sources.append(("_effective", hamiltonian_effective(point.model), False))
        for suffix, source, comp in sources:
            if point.jumps:
                rho0 = np.outer(psi0, psi0.conj())
                res = dynamics.evolve_density(
                    source, point.jumps, rho0, point.t_gate, point.integrator
                )
            else:
                res = dynamics.evolve_ket(source, psi0, point.t_gate, point.integrator)
            final = res.final
            if comp:
                final = _compensate_state(final, _compensation_full(point, point.t_gate))
            for tag, ket in track.items():
                row[f"pop_{tag}{suffix}"] = metrics.population(final, ket)
            drift = max(drift, res.drift)

    row["t_gate_us"] = point.t_gate
    row["trace_drift"] = drift
    row["flagged"] = bool(drift > DRIFT_FLAG_THRESHOLD)
    row["error"] = None
    return row


@dataclass
class SweepResult:
    """Tabular sweep output: one row per grid point, in grid order."""

    columns: list[str]
    rows: list[dict]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [row.get(name) for row in self.rows]

    def to_table(self) -> str:
        """Fixed-width human-readable rendering."""
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "yes" if v else "no"
            if isinstance(v, float):
                return f"{v:.6g}"
            return str(v)

        cells = [self.columns] + [[fmt(row.get(c)) for c in self.columns] for row in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.columns))]
        lines = []
        for k, r in enumerate(cells):
            lines.append("  ".join(s.rjust(w) for s, w in zip(r, widths)))
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


def run_scenario(config: ScenarioConfig | dict, threads: int | None = None) -> SweepResult:
    """Run every grid point of a scenario and collect rows in grid order.

    Integrator failures are recorded per row (column ``error``) without
    aborting the sweep; configuration problems raise :class:`ConfigError`.
    """
    if isinstance(config, dict):
        config = ScenarioConfig.from_dict(config)
    axes = [(axis["label"], _axis_points(axis)) for axis in config.sweep_axes]
    grid: list[tuple[dict, dict]] = []
    if not axes:
        grid.append(({}, {}))
    elif len(axes) == 1:
        label, pts = axes[0]
        for value, ov in pts:
            grid.append(({label: value}, ov))
    else:
        (l1, pts1), (l2, pts2) = axes
        for v1, ov1 in pts1:
            for v2, ov2 in pts2:
                grid.append(({l1: v1, l2: v2}, {**ov1, **ov2}))

    def run_point(item):
        labels, overrides = item
        try:
            row = _evaluate_point(config.with_overrides(overrides))
        except IntegrationError as exc:
            row = {"t_gate_us": None, "trace_drift": None, "flagged": True, "error": str(exc)}
        return {**labels, **row}

    threads = threads if threads is not None else _default_threads()
    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_point, grid))
    else:
        rows = [run_point(item) for item in grid]

    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    meta = {"schema_version": SCHEMA_VERSION}
    if config.name:
        meta["scenario"] = config.name
    return SweepResult(columns=columns, rows=rows, meta=meta)


def _round12(value):
    if isinstance(value, bool) or not isinstance(value, float):
        return value
    if not math.isfinite(value):
        return value
    return float(f"{value:.12g}")


def emit(result: SweepResult, fmt: str, path) -> None:
    """Write a sweep result as CSV (RFC-4180 quoting, header row) or JSON.

    Floats are serialized with 12 significant digits; a JSON file round
    trips through :func:`load_result` bit-identically.
    """
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(result.columns)
            for row in result.rows:
                record = []
                for col in result.columns:
                    v = row.get(col)
                    if v is None:
                        record.append("")
                    elif isinstance(v, bool):
                        record.append("true" if v else "false")
                    elif isinstance(v, float):
                        record.append(f"{v:.12g}")
                    else:
                        record.append(str(v))
                writer.writerow(record)
    elif fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "meta": result.meta,
            "columns": result.columns,
            "rows": [
                {col: _round12(row.get(col)) for col in result.columns if col in row}
                for row in result.rows
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}; expected 'csv' or 'json'")


def load_result(path) -> SweepResult:
    """Load a JSON file produced by :func:`emit`."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return SweepResult(columns=doc["columns"], rows=doc["rows"], meta=doc.get("meta", {}))


def fidelity_time_series(config: ScenarioConfig | dict, n_samples: int = 40,
                         effective: bool = False):
    """Average fidelity sampled across the gate window (decay-free only).

    Returns ``(times, fbar)`` arrays; the scenario must have no decay.
    Drive-phase compensation follows the scenario's outputs flag and is
    applied per sample time (never to the effective dynamics).
    """
    if isinstance(config, dict):
        config = ScenarioConfig.from_dict(config)
    return _fidelity_trace(resolve_point(config), n_samples, effective=effective)


def population_time_series(config: ScenarioConfig | dict, n_samples: int = 200):
    """Population traces of the configured tracked states vs time.

    Returns ``(times, {column: trace})`` on a common uniform time grid,
    following the same column naming as :func:`run_scenario` rows
    (``pop_<tag>`` plus ``_effective``).
    """
    if isinstance(config, dict):
        config = ScenarioConfig.from_dict(config)
    point = resolve_point(config)
    pops_cfg = point.outputs["populations"]
    if pops_cfg is None:
        raise ConfigError("scenario has no populations output configured")
    _, psi0 = _named_ket(pops_cfg["initial"], point)
    track = {tag: ket for tag, ket in (_named_ket(n, point) for n in pops_cfg["track"])}
    compensate = bool(point.outputs["compensate_drive_phases"])
    sources = [("", full_hamiltonian_terms(point.model), compensate)]
    if pops_cfg["include_effective"]:
        sources.append(("_effective", hamiltonian_effective(point.model), False))
    grid = np.linspace(0.0, point.t_gate, n_samples + 1)
    traces = {}
    for suffix, source, comp in sources:
        dt = dynamics.resolve_step(source, point.integrator, point.t_gate)
        n_steps = max(1, math.ceil(point.t_gate / dt - 1e-9))
        cfg = IntegratorConfig(
            method=point.integrator.method,
            dt=point.integrator.dt,
            rel_tol=point.integrator.rel_tol,
            abs_tol=point.integrator.abs_tol,
            store_every=max(1, n_steps // max(4, n_samples)),
        )
        if point.jumps:
            rho0 = np.outer(psi0, psi0.conj())
            res = dynamics.evolve_density(source, point.jumps, rho0, point.t_gate, cfg)
        else:
            res = dynamics.evolve_ket(source, psi0, point.t_gate, cfg)
        pops = {tag: np.empty(len(res.times)) for tag in track}
        for k, (t, state) in enumerate(zip(res.times, res.states)):
            if comp:
                state = _compensate_state(state, _compensation_full(point, float(t)))
            for tag, ket in track.items():
                pops[tag][k] = metrics.population(state, ket)
        for tag, trace in pops.items():
            traces[f"pop_{tag}{suffix}"] = np.interp(grid, res.times, trace)
    return grid, traces


def _base_three_qubit() -> dict:
    return {
        "units": "omega-prime-relative",
        "atoms": 3,
        "with_leakage": False,
        "params": {"drive_scale": 0.05},
        "drives": {
            "omega_prime": 1.0,
            "delta": 50.0,
            "omega1": "drive_scale * OmegaPrime",
            "omega2": "-drive_scale * OmegaPrime",
        },
        "interactions": {
            "relative": {"U12": "Delta / 8", "U13": "Delta", "U23": "Delta"}
        },
        "decay": None,
        "outputs": {"fidelity": True},
    }


def _preset_fig3a() -> dict:
    cfg = _base_three_qubit()
    cfg["outputs"]["effective_fidelity"] = True
    cfg["sweep"] = [
        {"label": "omega1", "path": "params.drive_scale", "values": [0.025, 0.05, 0.075]}
    ]
    return cfg


def _preset_fig3b() -> dict:
    cfg = _base_three_qubit()
    cfg["params"]["eta_delta"] = 0.0
    cfg["interactions"]["relative"]["U13"] = "(1 + eta_delta) * Delta"
    cfg["interactions"]["relative"]["U23"] = "(1 + eta_delta) * Delta"
    cfg["sweep"] = [
        {"label": "eta_delta", "path": "params.eta_delta",
         "start": -0.02, "stop": 0.02, "num": 21}
    ]
    return cfg


def _preset_fig3c() -> dict:
    cfg = _base_three_qubit()
    cfg["params"]["eta_omega"] = 0.0
    cfg["drives"]["omega_dprime"] = "(1 + eta_omega) * OmegaPrime"
    cfg["sweep"] = [
        {"label": "eta_omega", "path": "params.eta_omega",
         "start": -0.1, "stop": 0.1, "num": 21}
    ]
    return cfg


# control-control spacing, in units of the reference distance where
# U12 = Delta; 0.8909 is the two-photon resonance point U12 = 2 Delta
_FIG3D_RESONANT_SPACING = 0.8909


def _preset_fig3d() -> dict:
    cfg = _base_three_qubit()
    cfg["params"]["ctrl_spacing"] = 1.0
    cfg["interactions"]["relative"]["U12"] = "Delta / ctrl_spacing**6"
    # fbar_max records the best fidelity reachable within the gate window,
    # which is the quantity of interest on the narrow two-photon resonance
    cfg["outputs"]["fidelity_max"] = True
    spacings = sorted(set(np.round(np.linspace(0.5, 1.5, 21), 10)) | {_FIG3D_RESONANT_SPACING})
    cfg["sweep"] = [
        {"label": "ctrl_spacing", "path": "params.ctrl_spacing", "values": list(spacings)}
    ]
    return cfg


def _preset_fig4() -> dict:
    cfg = _base_three_qubit()
    cfg["decay"] = {"gamma": 0.001, "unit": "omega-prime", "channels": "two",
                    "conserve_total_rate": True}
    cfg["sweep"] = [
        {
            "label": "curve",
            "cases": [
                {"name": "omega1=0.025", "overrides": {"params.drive_scale": 0.025}},
                {"name": "omega1=0.05", "overrides": {"params.drive_scale": 0.05}},
                {"name": "omega1=0.075", "overrides": {"params.drive_scale": 0.075}},
                {"name": "omega1=0.05+leak",
                 "overrides": {"params.drive_scale": 0.05,
                                "decay.channels": "three",
                                "with_leakage": True}},
            ],
        },
        {"label": "gamma", "path": "decay.gamma",
         "start": 0.001, "stop": 0.01, "num": 7, "spacing": "log"},
    ]
    return cfg


_TABLE1_ROWS = [
    # (U12/2pi MHz, U/2pi MHz, omega_dprime/2pi MHz)
    (6.25, 50.0, 1.0),
    (6.25, 50.0, 2.0),
    (6.25, 49.5, 1.0),
    (6.25, 49.5, 2.0),
    (6.25, 50.5, 1.0),
    (6.25, 50.5, 2.0),
    (50.0, 50.0, 1.0),
    (50.0, 49.5, 2.0),
    (50.0, 50.5, 1.0),
    (0.78125, 50.0, 2.0),
]


def _preset_table1() -> dict:
    cases = []
    for u12, u, odp in _TABLE1_ROWS:
        cases.append(
            {
                "name": f"U12={u12:g},U={u:g},Odp={odp:g}",
                "overrides": {
                    "interactions.relative.U12": u12,
                    "interactions.relative.U13": u,
                    "interactions.relative.U23": u,
                    "drives.omega_dprime": odp,
                },
            }
        )
    return {
        "units": "two-pi-mhz",
        "atoms": 3,
        "with_leakage": False,
        "params": {},
        "drives": {
            "omega_prime": 1.0,
            "delta": 50.0,
            "omega1": 0.05,
            "omega2": -0.05,
            "omega_dprime": 1.0,
        },
        "interactions": {"relative": {"U12": 6.25, "U13": 50.0, "U23": 50.0}},
        "decay": {"gamma": 3.125, "unit": "khz", "channels": "two",
                  "conserve_total_rate": True},
        "outputs": {"fidelity": True},
        "sweep": [{"label": "row", "cases": cases}],
    }


def _preset_fig6(symmetric: bool) -> dict:
    relative = (
        {"U12": "Delta / 27", "U13": "Delta / 27", "U23": "Delta / 27",
         "U14": "Delta", "U24": "Delta", "U34": "Delta"}
        if symmetric
        else
        {"U12": "Delta / 8", "U13": "Delta / 64", "U23": "Delta / 8",
         "U14": "Delta", "U24": "Delta", "U34": "Delta"}
    )
    return {
        "units": "omega-prime-relative",
        "atoms": 4,
        "with_leakage": False,
        "params": {"drive_scale": 0.05},
        "drives": {
            "omega_prime": 1.0,
            "delta": 50.0,
            "omega1": "drive_scale * OmegaPrime",
            "omega2": "-drive_scale * OmegaPrime",
        },
        "interactions": {"relative": relative},
        "decay": None,
        "outputs": {
            "fidelity": False,
            "populations": {
                "initial": "probe-psi",
                "track": ["probe-phi", "probe-psi"],
                "include_effective": True,
            },
        },
        "sweep": [],
    }


def _preset_fig6a() -> dict:
    return _preset_fig6(symmetric=True)


def _preset_fig6b() -> dict:
    return _preset_fig6(symmetric=False)


_PRESETS = {
    "fig3a": (
        _preset_fig3a,
        "Gate fidelity vs target-drive strength (full vs effective dynamics), no decay.",
    ),
    "fig3b": (
        _preset_fig3b,
        "Fidelity vs control-target interaction mismatch eta = (U - Delta)/Delta, 21 points.",
    ),
    "fig3c": (
        _preset_fig3c,
        "Fidelity vs asymmetry between the two control-drive Rabi frequencies, 21 points.",
    ),
    "fig3d": (
        _preset_fig3d,
        "Fidelity vs control-control spacing, including the two-photon resonance dip.",
    ),
    "fig4": (
        _preset_fig4,
        "Fidelity vs spontaneous-emission rate for three drive strengths, "
        "plus a leakage-level variant.",
    ),
    "table1": (
        _preset_table1,
        "Fidelity spot checks at experimental MHz-scale parameters with finite "
        "Rydberg lifetime.",
    ),
    "fig6a": (
        _preset_fig6a,
        "Four-qubit population transfer, symmetric control triangle (all pair "
        "couplings Delta/27).",
    ),
    "fig6b": (
        _preset_fig6b,
        "Four-qubit population transfer with unequal control spacings "
        "(Delta/8, Delta/64 pair couplings).",
    ),
}


def preset_names() -> list[str]:
    return list(_PRESETS)


def preset_description(name: str) -> str:
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(_PRESETS)}")
    return _PRESETS[name][1]


def preset(name: str) -> ScenarioConfig:
    """Built-in, fully populated scenario configurations."""
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(_PRESETS)}")
    return ScenarioConfig.from_dict(_PRESETS[name][0](), name=name)
