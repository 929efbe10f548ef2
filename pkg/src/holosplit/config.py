"""Run configuration and JSON/CSV serialization.

Complex numbers serialize as [re, im] pairs and matrices as row-major nested
arrays, so every artifact is plain JSON. Config parsing is strict: unknown
keys are rejected at every level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import Constant, FramePath, HamiltonianSpec, Sampled, TimeGrid, dimension
from .holonomy import DecompositionReport
from .lambda_system import LambdaParams, case_setup
from .linalg import Tolerances
from .sections import Custom, Fixed, PhaseAnchored, SectionRule

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_run_config",
    "load_sampled_hamiltonian",
    "matrix_from_json",
    "matrix_to_json",
    "report_from_json",
    "report_to_json",
    "write_sampled_hamiltonian",
]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(rows, what: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} is not a nested [re, im] array: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ConfigError(f"{what} must be a 2d array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_from_json(v, what: str) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise ConfigError(f"{what} must be a [re, im] pair")
    return complex(float(v[0]), float(v[1]))


def _take(d: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run: Hamiltonian, initial frame, section rule, grid,
    tolerances and the optional seed for randomized commands."""

    spec: HamiltonianSpec
    psi0: np.ndarray
    rule: SectionRule
    grid: TimeGrid
    tolerances: Tolerances
    seed: int | None
    lambda_params: LambdaParams | None


def load_sampled_hamiltonian(path: str | Path) -> Sampled:
    """Read {"dimension", "times", "matrices"} from a JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read sampled Hamiltonian {path}: {exc}") from exc
    _take(data, {"dimension", "times", "matrices"}, {"dimension", "times", "matrices"},
          f"sampled Hamiltonian {path}")
    n = int(data["dimension"])
    times = np.asarray(data["times"], dtype=float)
    mats = np.stack([matrix_from_json(m, "Hamiltonian sample") for m in data["matrices"]])
    if mats.shape[1:] != (n, n):
        raise ConfigError(f"samples are not {n} x {n} matrices")
    try:
        return Sampled(TimeGrid(times), mats)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_sampled_hamiltonian(path: str | Path, times: np.ndarray, samples: np.ndarray) -> None:
    data = {
        "dimension": int(np.asarray(samples).shape[1]),
        "times": [float(t) for t in np.asarray(times)],
        "matrices": [matrix_to_json(m) for m in np.asarray(samples)],
    }
    Path(path).write_text(json.dumps(data))


def _load_custom_section(path: str | Path, grid: TimeGrid) -> FramePath:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read section file {path}: {exc}") from exc
    _take(data, {"dimension", "times", "matrices"}, {"dimension", "times", "matrices"},
          f"section file {path}")
    times = np.asarray(data["times"], dtype=float)
    if times.shape != grid.times.shape or not np.allclose(times, grid.times, atol=0, rtol=0):
        raise ConfigError("section file times do not match the run grid")
    frames = np.stack([matrix_from_json(m, "section frame") for m in data["matrices"]])
    try:
        return FramePath(grid, frames)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_system(d: dict, where: str) -> tuple[HamiltonianSpec, dict | None]:
    _take(d, {"kind", "omega0", "delta", "omega1", "omega2", "eta", "matrix", "path"},
          {"kind"}, where)
    kind = d["kind"]
    if kind == "lambda":
        _take(d, {"kind", "omega0", "delta", "omega1", "omega2", "eta"},
              {"kind", "omega0", "delta"}, where)
        fields = {
            "omega0": float(d["omega0"]),
            "delta": float(d["delta"]),
            "omega1": _complex_from_json(d.get("omega1", [1.0, 0.0]), "omega1"),
            "omega2": _complex_from_json(d.get("omega2", [0.0, 0.0]), "omega2"),
            "eta": float(d.get("eta", 0.0)),
        }
        try:
            spec = LambdaParams(tau=1.0, **fields).spec
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return spec, fields
    if kind == "constant":
        _take(d, {"kind", "matrix"}, {"kind", "matrix"}, where)
        try:
            return Constant(matrix_from_json(d["matrix"], "constant Hamiltonian")), None
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "sampled":
        _take(d, {"kind", "path"}, {"kind", "path"}, where)
        return load_sampled_hamiltonian(d["path"]), None
    raise ConfigError(f"unknown system kind {kind!r}")


def load_run_config(
    path: str | Path,
    *,
    tau_override: float | None = None,
    steps_override: int | None = None,
) -> RunConfig:
    """Parse and resolve a run configuration file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    _take(data, {"system", "subspace", "section", "grid", "tolerances", "seed"},
          {"system", "subspace", "section", "grid"}, "config")

    grid_d = data["grid"]
    _take(grid_d, {"tau", "steps"}, {"tau", "steps"}, "config.grid")
    tau = float(tau_override if tau_override is not None else grid_d["tau"])
    steps = int(steps_override if steps_override is not None else grid_d["steps"])
    if steps < 2:
        raise ConfigError("grid.steps must be at least 2")
    if tau <= 0:
        raise ConfigError("grid.tau must be positive")
    grid = TimeGrid.uniform(tau, steps)

    tol_d = data.get("tolerances", {})
    _take(tol_d, {"structure_tol", "positivity_tol", "separation_tol"}, set(),
          "config.tolerances")
    try:
        tolerances = Tolerances(**{k: float(v) for k, v in tol_d.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    spec, lam_fields = _resolve_system(data["system"], "config.system")
    lam_params = None

    sub = data["subspace"]
    _take(sub, {"lambda_case", "matrix"}, set(), "config.subspace")
    if ("lambda_case" in sub) == ("matrix" in sub):
        raise ConfigError("config.subspace needs exactly one of lambda_case or matrix")
    rule_d = data["section"]
    _take(rule_d, {"rule", "frame", "path"}, {"rule"}, "config.section")

    if "lambda_case" in sub:
        if lam_fields is None:
            raise ConfigError("lambda_case subspace requires a lambda system")
        case = sub["lambda_case"]
        if case not in ("i", "ii", "iii"):
            raise ConfigError(f"unknown lambda case {case!r}")
        try:
            lam_params = LambdaParams(tau=tau, **lam_fields)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        _, psi0, default_rule = case_setup(case, lam_params)
    else:
        psi0 = matrix_from_json(sub["matrix"], "subspace frame")
        default_rule = None
        if lam_fields is not None:
            try:
                lam_params = LambdaParams(tau=tau, **lam_fields)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
    if psi0.shape[0] != dimension(spec):
        raise ConfigError("subspace frame dimension does not match the system")

    rule = _resolve_rule(rule_d, grid, default_rule)

    seed = data.get("seed")
    if seed is not None:
        seed = int(seed)
    return RunConfig(spec, psi0, rule, grid, tolerances, seed, lam_params)


def _resolve_rule(d: dict, grid: TimeGrid, default_rule: SectionRule | None) -> SectionRule:
    name = d["rule"]
    if name == "fixed":
        _take(d, {"rule", "frame"}, {"rule"}, "config.section")
        frame = matrix_from_json(d["frame"], "section frame") if "frame" in d else None
        return Fixed(frame)
    if name == "phase_anchored":
        _take(d, {"rule"}, {"rule"}, "config.section")
        return PhaseAnchored()
    if name == "custom":
        _take(d, {"rule", "path"}, {"rule", "path"}, "config.section")
        return Custom(_load_custom_section(d["path"], grid))
    if name == "auto":
        _take(d, {"rule"}, {"rule"}, "config.section")
        if default_rule is None:
            raise ConfigError("section rule 'auto' requires a lambda_case subspace")
        return default_rule
    raise ConfigError(f"unknown section rule {name!r}")


def report_to_json(report: DecompositionReport) -> dict:
    return {
        "overlap": matrix_to_json(report.overlap),
        "w_final": matrix_to_json(report.w_final),
        "w_direct": matrix_to_json(report.w_direct),
        "holonomic_factor": matrix_to_json(report.holonomic_factor),
        "dynamical_factor": matrix_to_json(report.dynamical_factor),
        "g_factor": matrix_to_json(report.g_factor),
        "d_factor": matrix_to_json(report.d_factor),
        "max_commutator": float(report.max_commutator),
        "separation_residual": float(report.separation_residual),
        "product_residual": float(report.product_residual),
        "classification": report.classification,
        "time_evolution": matrix_to_json(report.time_evolution),
        "in_phase_margin": float(report.in_phase_margin),
        "grid": {"tau": float(report.tau), "steps": int(report.steps)},
    }


def report_from_json(data: dict) -> DecompositionReport:
    keys = {
        "overlap", "w_final", "w_direct", "holonomic_factor", "dynamical_factor",
        "g_factor", "d_factor", "max_commutator", "separation_residual",
        "product_residual", "classification", "time_evolution", "in_phase_margin",
        "grid",
    }
    _take(data, keys, keys, "report")
    _take(data["grid"], {"tau", "steps"}, {"tau", "steps"}, "report.grid")
    mats = {
        k: matrix_from_json(data[k], k)
        for k in ("overlap", "w_final", "w_direct", "holonomic_factor",
                  "dynamical_factor", "g_factor", "d_factor", "time_evolution")
    }
    return DecompositionReport(
        max_commutator=float(data["max_commutator"]),
        separation_residual=float(data["separation_residual"]),
        product_residual=float(data["product_residual"]),
        classification=str(data["classification"]),
        in_phase_margin=float(data["in_phase_margin"]),
        tau=float(data["grid"]["tau"]),
        steps=int(data["grid"]["steps"]),
        **mats,
    )
