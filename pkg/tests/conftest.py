import json
from pathlib import Path

import numpy as np
import pytest

from obstacle_lab.config import parse_config, shipped_configs
from obstacle_lab.grid import GridSpec, ScalarField
from obstacle_lab.solver import solve

ALPHA = 1.5


def homogeneous_field(grid: GridSpec, alpha: float = ALPHA, cos1: float = 0.3) -> ScalarField:
    """``r^alpha (1 + cos1 cos theta)``."""
    return ScalarField.from_function(
        grid, lambda x1, x2: np.hypot(x1, x2) ** alpha * (1 + cos1 * np.cos(np.arctan2(x2, x1))))


@pytest.fixture(scope="session")
def configs():
    return shipped_configs()


def compliant_solution(m: int):
    raw = json.loads(shipped_configs()["compliant_peak"].read_text())
    raw["grid"]["m"] = m
    cfg = parse_config(raw)
    return cfg, solve(cfg.problem())


@pytest.fixture(scope="session")
def compliant_257():
    return compliant_solution(257)


@pytest.fixture(scope="session")
def compliant_513():
    return compliant_solution(513)


def write_config(tmp_path: Path, raw: dict, name: str = "cfg.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return p
