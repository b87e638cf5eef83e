"""Separable obstacle families ``a(theta) r^alpha (1 + c r^p)``, boundary data,
and the ray-wise check that ``phi(r theta) / r^alpha`` never decreases."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InadmissibleDataError
from .grid import GridSpec


def _trig(cos_coeffs: Sequence[float], sin_coeffs: Sequence[float], theta: np.ndarray) -> np.ndarray:
    # coefficient k multiplies cos(k theta) / sin(k theta); sin_coeffs[0] is inert
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for k, c in enumerate(cos_coeffs):
        if c:
            out = out + c * np.cos(k * theta)
    for k, s in enumerate(sin_coeffs):
        if s and k:
            out = out + s * np.sin(k * theta)
    return out


def _float_list(values, name: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not all(math.isfinite(v) for v in out):
        raise ValueError(f"{name} must be finite")
    return out


@dataclass(frozen=True)
class Modulation:
    """Radial factor ``1 + c r^p``."""

    c: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and math.isfinite(self.p) and self.p >= 0):
            raise ValueError(f"modulation needs finite c and p >= 0, got c={self.c}, p={self.p}")

    def factor(self, r):
        return 1.0 + self.c * np.power(r, self.p)


@dataclass(frozen=True)
class ObstacleSpec:
    """``phi(r theta) = a(theta) r^alpha (1 + c r^p)`` with ``a`` a trigonometric polynomial."""

    alpha: float
    cos_coeffs: tuple[float, ...] = (1.0,)
    sin_coeffs: tuple[float, ...] = ()
    modulation: Optional[Modulation] = None

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha!r}")
        object.__setattr__(self, "cos_coeffs", _float_list(self.cos_coeffs, "cos_coeffs"))
        object.__setattr__(self, "sin_coeffs", _float_list(self.sin_coeffs, "sin_coeffs"))
        mod = self.modulation
        if mod is not None and mod.c != 0:
            th = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
            a = self.profile(th)
            scale = max(1.0, float(np.max(np.abs(a))))
            if np.any(mod.c * a < -1e-12 * scale * abs(mod.c)):
                raise ValueError("modulation coefficient c must have the sign of the profile a(theta)")

    def profile(self, theta):
        return _trig(self.cos_coeffs, self.sin_coeffs, theta)

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        r = np.hypot(x1, x2)
        val = self.profile(np.arctan2(x2, x1)) * np.power(r, self.alpha)
        if self.modulation is not None:
            val = val * self.modulation.factor(r)
        return val

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "cos_coeffs": list(self.cos_coeffs),
            "sin_coeffs": list(self.sin_coeffs),
            "modulation": None if self.modulation is None else {"c": self.modulation.c, "p": self.modulation.p},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObstacleSpec":
        unknown = set(d) - {"alpha", "cos_coeffs", "sin_coeffs", "modulation"}
        if unknown:
            raise KeyError(f"unknown obstacle key(s): {sorted(unknown)}")
        mod = d.get("modulation")
        if mod is not None:
            mod = Modulation(float(mod["c"]), float(mod["p"]))
        return cls(
            alpha=float(d["alpha"]),
            cos_coeffs=tuple(d.get("cos_coeffs", (1.0,))),
            sin_coeffs=tuple(d.get("sin_coeffs", ())),
            modulation=mod,
        )


def eval_obstacle(spec: ObstacleSpec, point) -> float:
    p = np.asarray(point, dtype=float)
    return float(spec(p[0], p[1]))


@dataclass(frozen=True)
class ScalingReport:
    passed: bool
    worst_violation: float
    worst_ray: Optional[float]
    worst_pair: Optional[tuple[float, float]]
    tol: float


def verify_scaling_inequality(obstacle, ray_count: int, radii: Sequence[float],
                              alpha: Optional[float] = None) -> ScalingReport:
    """Check ``(r/R)^alpha phi(R theta) >= phi(r theta)`` for all pairs ``r < R``
    in ``radii`` along ``ray_count`` equally spaced directions.

    ``alpha`` defaults to the obstacle's own degree; pass it explicitly to test
    an obstacle against a different homogeneity degree. ``worst_violation`` is
    the most negative slack, or 0 when every slack is within rounding.
    """
    if ray_count < 8:
        raise ValueError(f"ray_count must be >= 8, got {ray_count}")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be a strictly increasing list of at least two positive values")
    if alpha is None:
        alpha = obstacle.alpha
    th = 2 * np.pi * np.arange(ray_count) / ray_count
    r = radii[None, :]
    phi = obstacle(r * np.cos(th)[:, None], r * np.sin(th)[:, None])  # (rays, radii)
    tol = 1e-12 * float(np.max(np.abs(phi)))
    ratio = phi / r**alpha
    # slack[k, i, j] for r_i < R_j: (r_i/R_j)^alpha phi(R_j) - phi(r_i)
    slack = r[:, :, None] ** alpha * (ratio[:, None, :] - ratio[:, :, None])
    iu = np.triu_indices(radii.size, k=1)
    pairs = slack[:, iu[0], iu[1]]
    k, q = np.unravel_index(np.argmin(pairs), pairs.shape)
    worst = float(pairs[k, q])
    if worst >= -tol:
        return ScalingReport(True, 0.0, None, None, tol)
    return ScalingReport(False, worst, float(th[k]), (float(radii[iu[0][q]]), float(radii[iu[1][q]])), tol)


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data ``g``.

    ``constant``: ``g = value``. ``angular``: ``g = r^radial_power * b(theta)``
    with ``b`` a trigonometric polynomial, replaced by ``max(b, 0)`` when
    ``positive_part`` is set.
    """

    kind: str = "constant"
    value: float = 0.0
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()
    radial_power: float = 0.0
    positive_part: bool = False

    def __post_init__(self):
        if self.kind not in ("constant", "angular"):
            raise ValueError(f"boundary kind must be 'constant' or 'angular', got {self.kind!r}")
        object.__setattr__(self, "cos_coeffs", _float_list(self.cos_coeffs, "cos_coeffs"))
        object.__setattr__(self, "sin_coeffs", _float_list(self.sin_coeffs, "sin_coeffs"))
        if not math.isfinite(self.value) or not math.isfinite(self.radial_power):
            raise ValueError("boundary parameters must be finite")

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.kind == "constant":
            return np.full(np.broadcast(x1, x2).shape, self.value)
        b = _trig(self.cos_coeffs, self.sin_coeffs, np.arctan2(x2, x1))
        if self.positive_part:
            b = np.maximum(b, 0.0)
        return b * np.power(np.hypot(x1, x2), self.radial_power)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {"kind": "angular", "cos_coeffs": list(self.cos_coeffs), "sin_coeffs": list(self.sin_coeffs),
                "radial_power": self.radial_power, "positive_part": self.positive_part}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryData":
        kind = d.get("kind", "constant")
        allowed = {"kind", "value"} if kind == "constant" else {
            "kind", "cos_coeffs", "sin_coeffs", "radial_power", "positive_part"}
        unknown = set(d) - allowed
        if unknown:
            raise KeyError(f"unknown boundary key(s) for kind {kind!r}: {sorted(unknown)}")
        if kind == "constant":
            return cls("constant", value=float(d.get("value", 0.0)))
        return cls("angular", cos_coeffs=tuple(d.get("cos_coeffs", ())), sin_coeffs=tuple(d.get("sin_coeffs", ())),
                   radial_power=float(d.get("radial_power", 0.0)), positive_part=bool(d.get("positive_part", False)))


def check_admissible(g_values: np.ndarray, phi_values: np.ndarray, where: np.ndarray) -> None:
    """Raise InadmissibleDataError if ``g < phi`` (beyond rounding) at any masked node."""
    scale = max(1.0, float(np.max(np.abs(g_values[where]))), float(np.max(np.abs(phi_values[where]))))
    gap = g_values - phi_values
    bad = where & (gap < -1e-12 * scale)
    if np.any(bad):
        i, j = np.argwhere(bad)[np.argmin(gap[bad])]
        raise InadmissibleDataError(
            f"boundary data below the obstacle at node ({i}, {j}): g - phi = {gap[i, j]:.6g}")


def boundary_field(g, grid: GridSpec, obstacle=None) -> np.ndarray:
    """``g`` at every boundary-frame node as an ``(m, m)`` array (interior left at 0).

    If ``obstacle`` is given, admissibility ``g >= phi`` is enforced on the frame.
    """
    x1, x2 = grid.mesh()
    mask = grid.boundary_mask()
    out = np.zeros((grid.m, grid.m))
    gv = np.broadcast_to(g(x1, x2), out.shape)
    out[mask] = gv[mask]
    if obstacle is not None:
        check_admissible(out, np.broadcast_to(obstacle(x1, x2), out.shape), mask)
    return out
