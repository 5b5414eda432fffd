"""Parameter-sweep drivers with deterministic parallel execution.

Sweep points are independent tasks distributed over a process pool;
results land in a preallocated index-addressed table, so row order (and
the emitted CSV bytes, wall-time column aside) is identical for any
worker count. Per-point failures are recorded in a status column and
never abort a sweep. BLAS threading inside point evaluation is pinned to
one thread so that results do not depend on the pool layout.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import yaml
from threadpoolctl import threadpool_limits

from . import __version__
from .effective import (
    analytic_current_commuting,
    analytic_current_shifted,
    build_effective_junction,
    classify_family,
    effective_current_numeric,
)
from .embedding import polaron_spectrum
from .model import (
    DEFAULT_CUTOFF,
    DEFAULT_GAMMA,
    DEFAULT_OMEGA,
    DEFAULT_T_LEFT,
    DEFAULT_T_RIGHT,
    DEFAULT_TRUNCATION,
    BathSpec,
    JunctionSpec,
)
from .redfield import junction_current, rectification

MODES = (
    "single",
    "angle-grid",
    "lambda-scan",
    "m-convergence",
    "spectrum",
    "effective-compare",
    "rectification",
)

DEFAULT_LAMBDA_MIN = 0.1
DEFAULT_LAMBDA_MAX = 40.0
DEFAULT_LAMBDA_POINTS = 40
DEFAULT_ANGLE_POINTS = 21
DEFAULT_M_VALUES = (3, 4, 5, 6)
DEFAULT_SPECTRUM_LAMBDA_MAX = 6.0
DEFAULT_SPECTRUM_POINTS = 21
DEFAULT_M_LARGE = 40
DEFAULT_LEVELS = 10
DEFAULT_GAP_THRESHOLD = 0.1
DEFAULT_DIM_CAP = 512

_SKIP_PREFIX = "skipped"


class ConfigError(ValueError):
    """Configuration file cannot be parsed or violates an invariant."""


def default_lambda_grid(
    lo: float = DEFAULT_LAMBDA_MIN,
    hi: float = DEFAULT_LAMBDA_MAX,
    n: int = DEFAULT_LAMBDA_POINTS,
) -> tuple[float, ...]:
    return tuple(float(x) for x in np.geomspace(lo, hi, n))


@dataclass(frozen=True)
class SweepConfig:
    mode: str
    base: JunctionSpec
    n_theta: int = DEFAULT_ANGLE_POINTS
    n_phi: int = DEFAULT_ANGLE_POINTS
    lambdas: tuple[float, ...] = field(default_factory=default_lambda_grid)
    m_values: tuple[int, ...] = DEFAULT_M_VALUES
    spectrum_lambda_max: float = DEFAULT_SPECTRUM_LAMBDA_MAX
    spectrum_points: int = DEFAULT_SPECTRUM_POINTS
    m_large: int = DEFAULT_M_LARGE
    n_levels: int = DEFAULT_LEVELS
    gap_threshold: float = DEFAULT_GAP_THRESHOLD
    workers: int = 0
    out: str | None = None
    dim_cap: int = DEFAULT_DIM_CAP


@dataclass
class SweepResult:
    mode: str
    columns: tuple[str, ...]
    rows: list[tuple]
    report: str
    metadata: dict

    def failed_rows(self) -> list[tuple]:
        k = self.columns.index("status")
        return [r for r in self.rows
                if r[k] and not str(r[k]).startswith(_SKIP_PREFIX)]


# ---------------------------------------------------------------------------
# configuration

_TOP_KEYS = {
    "mode", "delta", "truncation", "left", "right", "angle_grid", "lambdas",
    "m_values", "spectrum", "workers", "out", "dim_cap",
}
_BATH_KEYS = {"temperature", "omega", "gamma", "lambda", "cutoff", "angle"}
_GRID_KEYS = {"n_theta", "n_phi"}
_SPECTRUM_KEYS = {"lambda_max", "points", "m_large", "levels", "gap_threshold"}
_LAMBDA_RANGE_KEYS = {"min", "max", "points", "spacing"}

_BATH_DEFAULTS = {
    "L": {"temperature": DEFAULT_T_LEFT, "omega": DEFAULT_OMEGA,
          "gamma": DEFAULT_GAMMA, "lambda": 0.1, "cutoff": DEFAULT_CUTOFF,
          "angle": math.pi / 2},
    "R": {"temperature": DEFAULT_T_RIGHT, "omega": DEFAULT_OMEGA,
          "gamma": DEFAULT_GAMMA, "lambda": 0.1, "cutoff": DEFAULT_CUTOFF,
          "angle": math.pi / 2},
}


def _check_keys(mapping: dict, allowed: set, path: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        names = ", ".join(sorted(f"{path}{k}" for k in unknown))
        raise ConfigError(f"unknown configuration keys: {names}")


def _number(mapping: dict, key: str, path: str, default, positive=False,
            nonnegative=False):
    value = mapping.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{key} must be a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{path}{key} must be positive, got {value}")
    if nonnegative and value < 0:
        raise ConfigError(f"{path}{key} must be nonnegative, got {value}")
    return float(value)


def _integer(mapping: dict, key: str, path: str, default, minimum=None):
    value = mapping.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}{key} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}{key} must be >= {minimum}, got {value}")
    return int(value)


def _bath_from_mapping(label: str, mapping: dict, path: str) -> BathSpec:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path.rstrip('.')} must be a mapping")
    _check_keys(mapping, _BATH_KEYS, path)
    d = _BATH_DEFAULTS[label]
    return BathSpec(
        label=label,
        temperature=_number(mapping, "temperature", path, d["temperature"],
                            positive=True),
        omega=_number(mapping, "omega", path, d["omega"], positive=True),
        gamma=_number(mapping, "gamma", path, d["gamma"], positive=True),
        lam=_number(mapping, "lambda", path, d["lambda"], nonnegative=True),
        cutoff=_number(mapping, "cutoff", path, d["cutoff"], positive=True),
        angle=_number(mapping, "angle", path, d["angle"]),
    )


def _lambdas_from_config(value) -> tuple[float, ...]:
    if value is None:
        return default_lambda_grid()
    if isinstance(value, dict):
        _check_keys(value, _LAMBDA_RANGE_KEYS, "lambdas.")
        lo = _number(value, "min", "lambdas.", DEFAULT_LAMBDA_MIN,
                     nonnegative=True)
        hi = _number(value, "max", "lambdas.", DEFAULT_LAMBDA_MAX,
                     positive=True)
        n = _integer(value, "points", "lambdas.", DEFAULT_LAMBDA_POINTS,
                     minimum=1)
        spacing = value.get("spacing", "log")
        if spacing not in ("log", "linear"):
            raise ConfigError(
                f"lambdas.spacing must be 'log' or 'linear', got {spacing!r}")
        if spacing == "log":
            if not lo > 0:
                raise ConfigError("lambdas.min must be positive for log spacing")
            return tuple(float(x) for x in np.geomspace(lo, hi, n))
        return tuple(float(x) for x in np.linspace(lo, hi, n))
    if isinstance(value, (list, tuple)):
        out = []
        for i, item in enumerate(value):
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"lambdas[{i}] must be a number, got {item!r}")
            if item < 0:
                raise ConfigError(f"lambdas[{i}] must be nonnegative, got {item}")
            out.append(float(item))
        if not out:
            raise ConfigError("lambdas must contain at least one value")
        return tuple(out)
    raise ConfigError(f"lambdas must be a list or a range mapping, got {value!r}")


def config_from_mapping(mapping: dict, mode: str | None = None) -> SweepConfig:
    """Validate a configuration mapping and resolve all defaults."""
    if not isinstance(mapping, dict):
        raise ConfigError("configuration root must be a mapping")
    _check_keys(mapping, _TOP_KEYS, "")
    cfg_mode = mapping.get("mode", mode)
    if cfg_mode is None:
        raise ConfigError("mode is required (in the file or on the command line)")
    if cfg_mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg_mode!r}")
    if mode is not None and cfg_mode != mode:
        raise ConfigError(
            f"config file sets mode {cfg_mode!r} but {mode!r} was requested")

    delta = _number(mapping, "delta", "", 1.0, positive=True)
    truncation = _integer(mapping, "truncation", "", DEFAULT_TRUNCATION,
                          minimum=2)
    left = _bath_from_mapping("L", mapping.get("left", {}), "left.")
    right = _bath_from_mapping("R", mapping.get("right", {}), "right.")
    base = JunctionSpec(delta=delta, left=left, right=right,
                        truncation=truncation)

    grid = mapping.get("angle_grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("angle_grid must be a mapping")
    _check_keys(grid, _GRID_KEYS, "angle_grid.")
    n_theta = _integer(grid, "n_theta", "angle_grid.", DEFAULT_ANGLE_POINTS,
                       minimum=1)
    n_phi = _integer(grid, "n_phi", "angle_grid.", DEFAULT_ANGLE_POINTS,
                     minimum=1)

    lambdas = _lambdas_from_config(mapping.get("lambdas"))

    m_values = mapping.get("m_values", list(DEFAULT_M_VALUES))
    if not isinstance(m_values, (list, tuple)) or not m_values:
        raise ConfigError("m_values must be a non-empty list of integers")
    out_m = []
    for i, m in enumerate(m_values):
        if isinstance(m, bool) or not isinstance(m, int) or m < 2:
            raise ConfigError(f"m_values[{i}] must be an integer >= 2, got {m!r}")
        out_m.append(m)
    if out_m != sorted(out_m):
        raise ConfigError("m_values must be ascending")

    spectrum = mapping.get("spectrum", {})
    if not isinstance(spectrum, dict):
        raise ConfigError("spectrum must be a mapping")
    _check_keys(spectrum, _SPECTRUM_KEYS, "spectrum.")
    spectrum_lambda_max = _number(spectrum, "lambda_max", "spectrum.",
                                  DEFAULT_SPECTRUM_LAMBDA_MAX, positive=True)
    spectrum_points = _integer(spectrum, "points", "spectrum.",
                               DEFAULT_SPECTRUM_POINTS, minimum=1)
    m_large = _integer(spectrum, "m_large", "spectrum.", DEFAULT_M_LARGE,
                       minimum=2)
    n_levels = _integer(spectrum, "levels", "spectrum.", DEFAULT_LEVELS,
                        minimum=1)
    gap_threshold = _number(spectrum, "gap_threshold", "spectrum.",
                            DEFAULT_GAP_THRESHOLD, positive=True)
    if m_large < truncation:
        raise ConfigError(
            f"spectrum.m_large ({m_large}) must be >= truncation ({truncation})")
    if n_levels > 2 * m_large**2:
        raise ConfigError(
            f"spectrum.levels ({n_levels}) exceeds dimension {2 * m_large**2}")

    workers = _integer(mapping, "workers", "", 0, minimum=0)
    dim_cap = _integer(mapping, "dim_cap", "", DEFAULT_DIM_CAP, minimum=8)
    out = mapping.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError(f"out must be a path string, got {out!r}")

    return SweepConfig(
        mode=cfg_mode, base=base, n_theta=n_theta, n_phi=n_phi,
        lambdas=lambdas, m_values=tuple(out_m),
        spectrum_lambda_max=spectrum_lambda_max,
        spectrum_points=spectrum_points, m_large=m_large, n_levels=n_levels,
        gap_threshold=gap_threshold, workers=workers, out=out,
        dim_cap=dim_cap,
    )


def load_config(path: str, mode: str | None = None,
                overrides: dict | None = None) -> SweepConfig:
    """Parse and validate a YAML configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: configuration root must be a mapping")
    if overrides:
        data = apply_overrides(data, overrides)
    return config_from_mapping(data, mode=mode)


def apply_overrides(mapping: dict, overrides: dict) -> dict:
    """Apply dotted-path overrides ('left.temperature': 1.5) to a mapping."""
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in mapping.items()}
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        node = out
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = {}
                node[part] = nxt
            elif not isinstance(nxt, dict):
                raise ConfigError(
                    f"cannot override {dotted!r}: {part!r} is not a section")
            node = nxt
        node[parts[-1]] = value
    return out


def resolved_mapping(cfg: SweepConfig) -> dict:
    """Canonical mapping; feeding it back reproduces the config exactly."""
    def bath(b: BathSpec) -> dict:
        return {"temperature": b.temperature, "omega": b.omega,
                "gamma": b.gamma, "lambda": b.lam, "cutoff": b.cutoff,
                "angle": b.angle}

    return {
        "mode": cfg.mode,
        "delta": cfg.base.delta,
        "truncation": cfg.base.truncation,
        "left": bath(cfg.base.left),
        "right": bath(cfg.base.right),
        "angle_grid": {"n_theta": cfg.n_theta, "n_phi": cfg.n_phi},
        "lambdas": list(cfg.lambdas),
        "m_values": list(cfg.m_values),
        "spectrum": {
            "lambda_max": cfg.spectrum_lambda_max,
            "points": cfg.spectrum_points,
            "m_large": cfg.m_large,
            "levels": cfg.n_levels,
            "gap_threshold": cfg.gap_threshold,
        },
        "workers": cfg.workers,
        "out": cfg.out,
        "dim_cap": cfg.dim_cap,
    }


def dump_config(cfg: SweepConfig) -> str:
    return yaml.safe_dump(resolved_mapping(cfg), sort_keys=False)


# ---------------------------------------------------------------------------
# point evaluation (module level so tasks pickle into worker processes)

def _ness_point(spec: JunctionSpec) -> dict:
    if spec.left.lam == 0.0 and spec.right.lam == 0.0:
        # fully decoupled qubit: each contact equilibrates with its own
        # mode and no current flows; the stationary state is degenerate,
        # so report the physical zero instead of solving
        return {"j_left": 0.0, "j_right": 0.0, "residual": 0.0,
                "min_eig": 0.0, "status": ""}
    res = junction_current(spec)
    status = "; ".join(res.warnings)
    return {"j_left": res.j_left, "j_right": res.j_right,
            "residual": res.residual, "min_eig": res.min_eigenvalue,
            "status": status}


def _effective_point(spec: JunctionSpec) -> dict:
    if spec.left.lam == 0.0 and spec.right.lam == 0.0:
        return {"j_rc": 0.0, "j_effective_numeric": 0.0,
                "j_effective_analytic": 0.0, "rel_dev": 0.0, "status": ""}
    rc = junction_current(spec)
    eff = build_effective_junction(spec)
    j_num = effective_current_numeric(eff)
    if eff.family == "commuting":
        j_ana = analytic_current_commuting(spec)
    else:
        j_ana = analytic_current_shifted(spec, spec.left.angle)
    if rc.j_left == 0.0:
        rel_dev = 0.0 if j_num == 0.0 else math.inf
    else:
        rel_dev = abs(rc.j_left - j_num) / abs(rc.j_left)
    status = "; ".join(rc.warnings)
    return {"j_rc": rc.j_left, "j_effective_numeric": j_num,
            "j_effective_analytic": j_ana, "rel_dev": rel_dev,
            "status": status}


def _spectrum_chunk(spec: JunctionSpec, lams: tuple[float, ...],
                    m_large: int, n_levels: int) -> list[dict]:
    levels = polaron_spectrum(spec, lams, m_large=m_large, n_levels=n_levels)
    return [{"lambda": lam, "levels": levels[i]} for i, lam in enumerate(lams)]


def _rectification_point(spec: JunctionSpec) -> dict:
    j_fwd, j_rev, asym = rectification(spec)
    return {"j_forward": j_fwd, "j_reverse": j_rev, "asymmetry": asym,
            "status": ""}


_POINT_FUNCTIONS = {
    "ness": _ness_point,
    "effective": _effective_point,
    "rectification": _rectification_point,
}


def _run_task(task) -> dict:
    kind = task[0]
    start = time.perf_counter()
    try:
        with threadpool_limits(limits=1):
            if kind == "spectrum":
                _, spec, lams, m_large, n_levels = task
                rows = _spectrum_chunk(spec, lams, m_large, n_levels)
                return {"rows": rows, "status": "",
                        "wall_time": time.perf_counter() - start}
            out = _POINT_FUNCTIONS[kind](task[1])
    except Exception as exc:  # per-point failures are data, not crashes
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")[:300]
        out = {"status": msg}
    out["wall_time"] = time.perf_counter() - start
    return out


def _resolve_workers(cfg: SweepConfig) -> int:
    if cfg.workers > 0:
        return cfg.workers
    return os.cpu_count() or 1


def _evaluate(tasks: list, workers: int) -> list[dict]:
    if workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (workers * 8))
        return list(pool.map(_run_task, tasks, chunksize=chunk))


# ---------------------------------------------------------------------------
# mode drivers

def _nan_fill(result: dict, keys: tuple[str, ...]) -> tuple:
    return tuple(result.get(k, math.nan if k != "status" else "") for k in keys)


def _metadata(cfg: SweepConfig) -> dict:
    return {"version": __version__, "config": resolved_mapping(cfg)}


def angle_grid_values(n: int) -> np.ndarray:
    """Inclusive [0, pi] grid so the pi/2 symmetry point sits on a node."""
    return np.linspace(0.0, math.pi, n)


def run_angle_grid(cfg: SweepConfig) -> SweepResult:
    thetas = angle_grid_values(cfg.n_theta)
    phis = angle_grid_values(cfg.n_phi)
    tasks = []
    coords = []
    for th in thetas:
        for ph in phis:
            spec = replace(
                cfg.base,
                left=replace(cfg.base.left, angle=float(th)),
                right=replace(cfg.base.right, angle=float(ph)),
            )
            tasks.append(("ness", spec))
            coords.append((float(th), float(ph)))
    results = _evaluate(tasks, _resolve_workers(cfg))
    value_keys = ("j_left", "j_right", "residual", "min_eig", "status",
                  "wall_time")
    rows = [coords[i] + _nan_fill(r, value_keys)
            for i, r in enumerate(results)]
    columns = ("theta", "phi") + value_keys
    report = _angle_grid_report(columns, rows)
    return SweepResult(cfg.mode, columns, rows, report, _metadata(cfg))


def _angle_grid_report(columns, rows) -> str:
    k_status = columns.index("status")
    k_j = columns.index("j_left")
    best = None
    for row in rows:
        if row[k_status]:
            continue
        if math.isfinite(row[k_j]) and (best is None or row[k_j] > best[k_j]):
            best = row
    lines = ["argmax report"]
    if best is None:
        lines.append("no successful grid points")
        return "\n".join(lines)
    theta, phi, j = best[0], best[1], best[k_j]
    # perpendicular distance to the ridge phi - theta = pi/2 (mod pi)
    g = (phi - theta) % math.pi
    ridge = abs(g - math.pi / 2) / math.sqrt(2.0)
    lines.append(f"max j_left: {j:.17g}")
    lines.append(f"argmax theta: {theta:.17g}")
    lines.append(f"argmax phi: {phi:.17g}")
    lines.append(f"distance to quarter-shift ridge: {ridge:.17g}")
    return "\n".join(lines)


def run_lambda_scan(cfg: SweepConfig) -> SweepResult:
    tasks = [("ness", cfg.base.with_couplings(lam)) for lam in cfg.lambdas]
    results = _evaluate(tasks, _resolve_workers(cfg))
    value_keys = ("j_left", "j_right", "residual", "min_eig", "status",
                  "wall_time")
    rows = [(cfg.lambdas[i],) + _nan_fill(r, value_keys)
            for i, r in enumerate(results)]
    columns = ("lambda",) + value_keys
    report = _peak_report(columns, rows, "lambda", "j_left")
    return SweepResult(cfg.mode, columns, rows, report, _metadata(cfg))


def quadratic_peak(xs, ys) -> tuple[float, float]:
    """Vertex of the parabola through the three points around the max.

    Falls back to the discrete maximum when it sits on the boundary or
    the points are collinear.
    """
    i = int(np.argmax(ys))
    if i == 0 or i == len(xs) - 1:
        return float(xs[i]), float(ys[i])
    x0, x1, x2 = xs[i - 1], xs[i], xs[i + 1]
    y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
    denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if denom == 0:
        return float(x1), float(y1)
    x_star = x1 - 0.5 * ((x1 - x0) ** 2 * (y1 - y2)
                         - (x1 - x2) ** 2 * (y1 - y0)) / denom
    # value at the vertex from the same parabola
    l0 = (x_star - x1) * (x_star - x2) / ((x0 - x1) * (x0 - x2))
    l1 = (x_star - x0) * (x_star - x2) / ((x1 - x0) * (x1 - x2))
    l2 = (x_star - x0) * (x_star - x1) / ((x2 - x0) * (x2 - x1))
    return float(x_star), float(y0 * l0 + y1 * l1 + y2 * l2)


def _peak_report(columns, rows, x_name, y_name) -> str:
    k_status = columns.index("status")
    k_x = columns.index(x_name)
    k_y = columns.index(y_name)
    good = [(r[k_x], r[k_y]) for r in rows
            if not r[k_status] and math.isfinite(r[k_y])]
    lines = ["peak report"]
    if not good:
        lines.append("no successful points")
        return "\n".join(lines)
    xs = [g[0] for g in good]
    ys = [g[1] for g in good]
    x_star, y_star = quadratic_peak(xs, ys)
    lines.append(f"peak {x_name}: {x_star:.17g}")
    lines.append(f"peak {y_name}: {y_star:.17g}")
    return "\n".join(lines)


def run_m_convergence(cfg: SweepConfig) -> SweepResult:
    tasks = []
    coords = []
    skipped = []
    for lam in cfg.lambdas:
        for m in cfg.m_values:
            spec = replace(cfg.base.with_couplings(lam), truncation=m)
            if 2 * m * m > cfg.dim_cap:
                skipped.append((lam, m))
                coords.append((lam, m))
                tasks.append(None)
            else:
                coords.append((lam, m))
                tasks.append(("ness", spec))
    live = [t for t in tasks if t is not None]
    results = iter(_evaluate(live, _resolve_workers(cfg)))
    value_keys = ("j_left", "j_right", "residual", "min_eig", "status",
                  "wall_time")
    rows = []
    for i, task in enumerate(tasks):
        if task is None:
            filler = {"status": f"{_SKIP_PREFIX}: dimension over cap "
                                f"({2 * coords[i][1] ** 2} > {cfg.dim_cap})",
                      "wall_time": 0.0}
            rows.append(coords[i] + _nan_fill(filler, value_keys))
        else:
            rows.append(coords[i] + _nan_fill(next(results), value_keys))
    columns = ("lambda", "m") + value_keys
    report = _convergence_report(cfg, columns, rows)
    return SweepResult(cfg.mode, columns, rows, report, _metadata(cfg))


def _convergence_report(cfg, columns, rows) -> str:
    k_status = columns.index("status")
    k_j = columns.index("j_left")
    lines = ["convergence report"]
    for lam in cfg.lambdas:
        series = [(r[1], r[k_j]) for r in rows
                  if r[0] == lam and not r[k_status] and math.isfinite(r[k_j])]
        series.sort()
        for (m0, j0), (m1, j1) in zip(series, series[1:]):
            rel = abs(j1 - j0) / max(abs(j0), 1e-300)
            lines.append(
                f"lambda {lam:.17g} M {m0}->{m1}: relative change {rel:.17g}")
    if len(lines) == 1:
        lines.append("no successive-M pairs available")
    return "\n".join(lines)


def run_spectrum(cfg: SweepConfig) -> SweepResult:
    lams = tuple(float(x) for x in
                 np.linspace(0.0, cfg.spectrum_lambda_max, cfg.spectrum_points))
    workers = _resolve_workers(cfg)
    n_chunks = min(workers, len(lams))
    chunks = [tuple(c) for c in np.array_split(lams, n_chunks)]
    tasks = [("spectrum", cfg.base, chunk, cfg.m_large, cfg.n_levels)
             for chunk in chunks if len(chunk)]
    results = _evaluate(tasks, workers)
    rows = []
    failed = None
    for task, res in zip(tasks, results):
        if res["status"]:
            failed = res["status"]
            for lam in task[2]:
                for idx in range(cfg.n_levels):
                    rows.append((lam, idx + 1, math.nan, res["status"],
                                 res["wall_time"]))
            continue
        for chunk_row in res["rows"]:
            for idx, energy in enumerate(chunk_row["levels"]):
                rows.append((chunk_row["lambda"], idx + 1, float(energy), "",
                             res["wall_time"]))
    columns = ("lambda", "level_index", "energy", "status", "wall_time")
    report = _crossing_report(cfg, rows) if failed is None else (
        f"crossing report\nspectrum evaluation failed: {failed}")
    return SweepResult(cfg.mode, columns, rows, report, _metadata(cfg))


def spectrum_min_gaps(rows, n_levels: int) -> dict[tuple[int, int], float]:
    """Minimum gap over the coupling grid for each adjacent level pair.

    Level indices are 1-based in the emitted rows and in the keys here.
    """
    by_lambda: dict[float, dict[int, float]] = {}
    for lam, idx, energy, status, _ in rows:
        if status:
            continue
        by_lambda.setdefault(lam, {})[idx] = energy
    gaps: dict[tuple[int, int], float] = {}
    for lam in sorted(by_lambda):
        levels = by_lambda[lam]
        for i in range(1, n_levels):
            if i in levels and i + 1 in levels:
                gap = levels[i + 1] - levels[i]
                key = (i, i + 1)
                if key not in gaps or gap < gaps[key]:
                    gaps[key] = gap
    return gaps


def _crossing_report(cfg: SweepConfig, rows) -> str:
    gaps = spectrum_min_gaps(rows, cfg.n_levels)
    lines = ["crossing report",
             f"gap threshold: {cfg.gap_threshold:.17g}"]
    below = 0
    for (i, j), gap in sorted(gaps.items()):
        flag = " BELOW-THRESHOLD" if gap < cfg.gap_threshold else ""
        if gap < cfg.gap_threshold:
            below += 1
        lines.append(f"levels {i}-{j}: min gap {gap:.17g}{flag}")
    lines.append(f"pairs below threshold: {below}")
    return "\n".join(lines)


def run_effective_compare(cfg: SweepConfig) -> SweepResult:
    # an unsupported angle pair is a configuration problem for the whole
    # run, not a per-point failure
    try:
        classify_family(cfg.base.left.angle, cfg.base.right.angle)
    except Exception as exc:
        raise ConfigError(f"effective-compare: {exc}") from exc
    tasks = [("effective", cfg.base.with_couplings(lam))
             for lam in cfg.lambdas]
    results = _evaluate(tasks, _resolve_workers(cfg))
    value_keys = ("j_rc", "j_effective_numeric", "j_effective_analytic",
                  "rel_dev", "status", "wall_time")
    rows = [(cfg.lambdas[i],) + _nan_fill(r, value_keys)
            for i, r in enumerate(results)]
    columns = ("lambda",) + value_keys
    k_status = columns.index("status")
    k_dev = columns.index("rel_dev")
    devs = [r[k_dev] for r in rows if not r[k_status] and math.isfinite(r[k_dev])]
    family = classify_family(cfg.base.left.angle, cfg.base.right.angle)
    report = "\n".join([
        "effective comparison report",
        f"family: {family}",
        f"max rel_dev: {max(devs):.17g}" if devs else "no successful points",
    ])
    return SweepResult(cfg.mode, columns, rows, report, _metadata(cfg))


def run_single(cfg: SweepConfig) -> SweepResult:
    results = _evaluate([("ness", cfg.base)], 1)
    value_keys = ("j_left", "j_right", "residual", "min_eig", "status",
                  "wall_time")
    rows = [_nan_fill(results[0], value_keys)]
    report = "single-point report\n" + "\n".join(
        f"{k}: {rows[0][i]}" for i, k in enumerate(value_keys))
    return SweepResult(cfg.mode, value_keys, rows, report, _metadata(cfg))


def run_rectification(cfg: SweepConfig) -> SweepResult:
    results = _evaluate([("rectification", cfg.base)], 1)
    value_keys = ("j_forward", "j_reverse", "asymmetry", "status", "wall_time")
    rows = [_nan_fill(results[0], value_keys)]
    report = "rectification report\n" + "\n".join(
        f"{k}: {rows[0][i]}" for i, k in enumerate(value_keys))
    return SweepResult(cfg.mode, value_keys, rows, report, _metadata(cfg))


_RUNNERS = {
    "single": run_single,
    "angle-grid": run_angle_grid,
    "lambda-scan": run_lambda_scan,
    "m-convergence": run_m_convergence,
    "spectrum": run_spectrum,
    "effective-compare": run_effective_compare,
    "rectification": run_rectification,
}


def run(cfg: SweepConfig) -> SweepResult:
    return _RUNNERS[cfg.mode](cfg)


# ---------------------------------------------------------------------------
# emission

def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17g}"


def csv_lines(result: SweepResult, include_wall_time: bool = True) -> list[str]:
    cols = list(result.columns)
    keep = [i for i, c in enumerate(cols)
            if include_wall_time or c != "wall_time"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([cols[i] for i in keep])
    for row in result.rows:
        writer.writerow([_format_cell(row[i]) for i in keep])
    return buf.getvalue().splitlines()


def determinism_hash(result: SweepResult) -> str:
    """Hash of the CSV body with the wall-time column removed."""
    body = "\n".join(csv_lines(result, include_wall_time=False))
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def write_csv(result: SweepResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(csv_lines(result)) + "\n")


def report_text(result: SweepResult) -> str:
    lines = [
        f"qjunction {result.metadata['version']}",
        f"mode: {result.mode}",
        f"rows: {len(result.rows)}",
        f"failed points: {len(result.failed_rows())}",
        f"determinism hash: {determinism_hash(result)}",
        "",
        result.report,
        "",
        "resolved configuration:",
        yaml.safe_dump(result.metadata["config"], sort_keys=False).rstrip(),
    ]
    return "\n".join(lines) + "\n"


def write_report(result: SweepResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_text(result))
