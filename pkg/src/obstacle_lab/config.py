"""Experiment configuration: JSON schema, validation, and object construction.

A config looks like::

    {
      "description": "optional free text",
      "grid": {"L": 1.0, "m": 257},
      "obstacle": {"alpha": 1.5, "cos_coeffs": [-1.0, -0.3], "sin_coeffs": [],
                   "modulation": {"c": -0.5, "p": 1.0}},
      "boundary": {"kind": "constant", "value": -0.3},
      "solver": {"omega": 1.9, "tol": 1e-10, "max_iter": 500000},
      "analysis": {
        "alpha": 1.5, "alpha_override": false,
        "radii": {"R_min": 0.05, "R_max": 0.5, "ratio": 1.189207115002721},
        "blowup_radii": {"R0": 0.5, "count": 6}, "blowup_grid_m": 257,
        "thresholds": {"zero_rel": 1e-4, "homogeneous": 1e-2},
        "annulus": [0.25, 0.75],
        "verify": {"ray_count": 64, "radii_count": 64}
      },
      "output": "out/compliant"
    }

Every section except ``grid``, ``obstacle`` and ``boundary`` is optional.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .blowup import Thresholds, blowup_radii
from .errors import ConfigError
from .grid import GridSpec
from .obstacles import BoundaryData, ObstacleSpec
from .solver import ProblemSpec
from .weiss import geometric_radii

_TOP_KEYS = {"description", "grid", "obstacle", "boundary", "solver", "analysis", "output"}
_ANALYSIS_KEYS = {"alpha", "alpha_override", "radii", "blowup_radii", "blowup_grid_m", "thresholds",
                  "annulus", "verify"}


@dataclass
class ExperimentConfig:
    raw: dict
    grid: GridSpec
    obstacle: ObstacleSpec
    boundary: BoundaryData
    omega: float = 1.9
    tol: Optional[float] = None
    max_iter: int = 500_000
    alpha: float = 1.5
    profile_radii: list = field(default_factory=list)
    blowup_radii: list = field(default_factory=list)
    blowup_grid: GridSpec = GridSpec(1.0, 257)
    thresholds: Thresholds = Thresholds()
    annulus: tuple = (0.25, 0.75)
    verify_rays: int = 64
    verify_radii: list = field(default_factory=list)
    output: str = "out"

    def problem(self) -> ProblemSpec:
        return ProblemSpec(self.grid, self.obstacle, self.boundary, self.omega, self.tol, self.max_iter)


def _section(d: dict, key: str, required: bool = True) -> dict:
    if key not in d:
        if required:
            raise ConfigError(f"missing required key '{key}'")
        return {}
    val = d[key]
    if not isinstance(val, dict):
        raise ConfigError(f"key '{key}' must be an object")
    return val


def _wrap(key: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        msg = exc.args[0] if exc.args else exc
        raise ConfigError(f"invalid '{key}': {msg}") from exc


def _profile_radii(spec, grid: GridSpec) -> list:
    if isinstance(spec, list):
        radii = [float(r) for r in spec]
    else:
        unknown = set(spec) - {"R_min", "R_max", "ratio"}
        if unknown:
            raise KeyError(f"unknown key(s) {sorted(unknown)}")
        R_min = float(spec.get("R_min", 4 * grid.h))
        R_max = float(spec.get("R_max", grid.L / 2))
        if R_min > R_max:
            radii = []
        else:
            radii = geometric_radii(R_min, R_max, float(spec.get("ratio", 2 ** 0.25)))
    if not radii:
        raise ValueError("radii list is empty")
    lo, hi = 2 * grid.h, grid.L - 2 * grid.h
    for R in radii:
        if not (lo * (1 - 1e-12) <= R <= hi * (1 + 1e-12)):
            raise ValueError(f"radius {R} outside [2h, L - 2h] = [{lo:.6g}, {hi:.6g}]")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    return radii


def _blowup_radii(spec) -> list:
    if isinstance(spec, list):
        radii = [float(r) for r in spec]
    else:
        unknown = set(spec) - {"R0", "count"}
        if unknown:
            raise KeyError(f"unknown key(s) {sorted(unknown)}")
        radii = blowup_radii(float(spec.get("R0", 0.5)), int(spec.get("count", 6)))
    if len(radii) < 4:
        raise ValueError("need at least 4 blow-up radii")
    return radii


def parse_config(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")

    g = _section(d, "grid")
    grid = _wrap("grid", lambda: GridSpec(float(g.get("L", 1.0)), int(g["m"])))
    obstacle = _wrap("obstacle", ObstacleSpec.from_dict, _section(d, "obstacle"))
    boundary = _wrap("boundary", BoundaryData.from_dict, _section(d, "boundary"))

    s = _section(d, "solver", required=False)
    unknown = set(s) - {"omega", "tol", "max_iter"}
    if unknown:
        raise ConfigError(f"unknown key(s) in 'solver': {sorted(unknown)}")
    omega = _wrap("solver.omega", float, s.get("omega", 1.9))
    if not 0 < omega < 2:
        raise ConfigError(f"invalid 'solver.omega': must lie in (0, 2), got {omega}")
    tol = s.get("tol")
    if tol is not None:
        tol = _wrap("solver.tol", float, tol)
        if not tol > 0:
            raise ConfigError("invalid 'solver.tol': must be positive")
    max_iter = _wrap("solver.max_iter", int, s.get("max_iter", 500_000))
    if max_iter < 0:
        raise ConfigError("invalid 'solver.max_iter': must be nonnegative")

    a = _section(d, "analysis", required=False)
    unknown = set(a) - _ANALYSIS_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) in 'analysis': {sorted(unknown)}")
    alpha = _wrap("analysis.alpha", float, a.get("alpha", obstacle.alpha))
    if not 1 < alpha < 2:
        raise ConfigError(f"invalid 'analysis.alpha': must lie in (1, 2), got {alpha}")
    if alpha != obstacle.alpha and not a.get("alpha_override", False):
        raise ConfigError(f"invalid 'analysis.alpha': {alpha} differs from obstacle alpha {obstacle.alpha} "
                          "(set 'analysis.alpha_override' to allow)")
    radii = _wrap("analysis.radii", _profile_radii, a.get("radii", {}), grid)
    b_radii = _wrap("analysis.blowup_radii", _blowup_radii, a.get("blowup_radii", {}))
    b_grid = _wrap("analysis.blowup_grid_m", lambda: GridSpec(1.0, int(a.get("blowup_grid_m", 257))))
    thresholds = _wrap("analysis.thresholds", Thresholds.from_dict, a.get("thresholds", {}))
    annulus = _wrap("analysis.annulus", lambda: tuple(float(x) for x in a.get("annulus", (0.25, 0.75))))
    if len(annulus) != 2 or not 0 < annulus[0] < annulus[1]:
        raise ConfigError("invalid 'analysis.annulus': need [r_in, r_out] with 0 < r_in < r_out")
    v = a.get("verify", {})
    unknown = set(v) - {"ray_count", "radii_count"}
    if unknown:
        raise ConfigError(f"unknown key(s) in 'analysis.verify': {sorted(unknown)}")
    rays = _wrap("analysis.verify.ray_count", int, v.get("ray_count", 64))
    if rays < 8:
        raise ConfigError("invalid 'analysis.verify.ray_count': must be >= 8")
    n_r = _wrap("analysis.verify.radii_count", int, v.get("radii_count", 64))
    if n_r < 2:
        raise ConfigError("invalid 'analysis.verify.radii_count': must be >= 2")
    v_radii = list(np.linspace(grid.L / n_r, grid.L, n_r))

    output = d.get("output", "out")
    if not isinstance(output, str):
        raise ConfigError("invalid 'output': must be a path string")
    return ExperimentConfig(d, grid, obstacle, boundary, omega, tol, max_iter, alpha, radii, b_radii, b_grid,
                            thresholds, annulus, rays, v_radii, output)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        keys = re.findall(r'"([^"\\]+)"\s*:', text[:exc.pos])
        near = f" near key '{keys[-1]}'" if keys else ""
        raise ConfigError(f"malformed JSON in {path}{near}: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    return parse_config(d)


def shipped_configs() -> dict:
    """Name -> path of the configs bundled with the package."""
    root = Path(__file__).parent / "configs"
    return {p.stem: p for p in sorted(root.glob("*.json"))}
