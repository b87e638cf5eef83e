"""The monotone quantity

    A(R, u) = R^{-(n + 2(alpha-1))} int_{B_R} |grad u|^2 - alpha int_{S^1} (u(R theta) / R^alpha)^2,

its drift lower bound, the cone extension used as a comparison function, and
profiles of all of these over a range of radii. ``n = 2`` throughout.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import RadiusError
from .grid import (ScalarField, circle_points, default_sphere_nodes, dirichlet_energy, gradient_at,
                   sample, sphere_integral)

DIM = 2


def _exponent(alpha: float) -> float:
    return DIM + 2 * (alpha - 1)


def _trace(u: ScalarField, R: float):
    """Angles, unit directions, corrected samples of u on the circle of radius R."""
    K = default_sphere_nodes(u.grid, R)
    th, pts = circle_points(R, K)
    return th, pts / R, sample(u, pts, corrected=True)


def energy_term(u: ScalarField, R: float, alpha: float) -> float:
    return dirichlet_energy(u, R) / R ** _exponent(alpha)


def boundary_term(u: ScalarField, R: float, alpha: float) -> float:
    u.grid.check_radius(R)
    _, _, vals = _trace(u, R)
    return alpha * sphere_integral(lambda th: (vals / R**alpha) ** 2, R, u.grid, K=vals.size)


def A_value(u: ScalarField, R: float, alpha: float) -> float:
    return energy_term(u, R, alpha) - boundary_term(u, R, alpha)


def drift(u: ScalarField, R: float, alpha: float) -> float:
    """``int_{S^1} R^{-(1+2(alpha-1))} (d_nu u - alpha u / R)^2``; never negative."""
    g = u.grid
    if R < g.h * (1 - 1e-12):
        raise RadiusError(f"drift needs R >= h = {g.h:.6g}, got {R}")
    g.check_radius(R, margin=2.0)
    _, nu, vals = _trace(u, R)
    grad = gradient_at(u, R * nu)
    dnu = np.sum(grad * nu, axis=-1)
    integrand = (dnu - alpha * vals / R) ** 2 / R ** (1 + 2 * (alpha - 1))
    return sphere_integral(lambda th: integrand, R, g, K=vals.size)


def cone_extension(u: ScalarField, R: float, alpha: float) -> ScalarField:
    """``w(x) = (|x|/R)^alpha u(R x/|x|)`` on the closed ball ``B_R``, ``w(0) = 0``,
    and ``w = u`` outside it."""
    g = u.grid
    g.check_radius(R)
    x1, x2 = g.mesh()
    r = g.radius
    inside = (r <= R * (1 + 1e-12)) & (r > 0)
    w = np.array(u.values)
    pts = np.stack([x1[inside], x2[inside]], axis=-1) * (R / r[inside])[:, None]
    w[inside] = (r[inside] / R) ** alpha * sample(u, pts, corrected=True)
    w[r == 0] = 0.0
    return ScalarField(g, w)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    gap: float


def energy_identity_check(u: ScalarField, R: float, alpha: float) -> IdentityCheck:
    """Energy of the cone extension over ``B_R`` against its closed form
    ``R^n / (n + 2(alpha-1)) int_{S^1} [alpha^2 u^2/R^2 + |grad u|^2 - (grad u . theta)^2]``."""
    lhs = dirichlet_energy(cone_extension(u, R, alpha), R)
    _, nu, vals = _trace(u, R)
    grad = gradient_at(u, R * nu)
    dnu = np.sum(grad * nu, axis=-1)
    integrand = alpha**2 * vals**2 / R**2 + np.sum(grad**2, axis=-1) - dnu**2
    rhs = R**DIM / _exponent(alpha) * sphere_integral(lambda th: integrand, R, u.grid, K=vals.size)
    return IdentityCheck(lhs, rhs, lhs - rhs)


@dataclass(frozen=True)
class ProfileRow:
    R: float
    energy_term: float
    boundary_term: float
    A: float
    drift: float


@dataclass
class MonotoneProfile:
    alpha: float
    rows: list = field(default_factory=list)

    @property
    def radii(self) -> np.ndarray:
        return np.array([r.R for r in self.rows])

    @property
    def A(self) -> np.ndarray:
        return np.array([r.A for r in self.rows])

    @property
    def drifts(self) -> np.ndarray:
        return np.array([r.drift for r in self.rows])

    def to_csv(self, path=None) -> str:
        lines = ["R,energy_term,boundary_term,A,drift"]
        for r in self.rows:
            lines.append(f"{r.R:.17g},{r.energy_term:.17g},{r.boundary_term:.17g},{r.A:.17g},{r.drift:.17g}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_svg(self, path=None) -> str:
        from .report import line_plot_svg

        logR = np.log(self.radii)
        text = line_plot_svg(
            [("A(R)", logR, self.A), ("drift(R)", logR, self.drifts)],
            title=f"monotone quantity, alpha = {self.alpha:g}", xlabel="log R")
        if path is not None:
            Path(path).write_text(text)
        return text


def geometric_radii(R_min: float, R_max: float, ratio: float = 2 ** 0.25) -> list[float]:
    """``R_min * ratio^k`` up to ``R_max`` (inclusive up to rounding)."""
    if not (0 < R_min <= R_max) or ratio <= 1:
        raise ValueError("need 0 < R_min <= R_max and ratio > 1")
    out = []
    k = 0
    while True:
        R = R_min * ratio**k
        if R > R_max * (1 + 1e-9):
            break
        out.append(R)
        k += 1
    return out


def thread_count() -> int:
    env = os.environ.get("OBSTACLE_LAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def profile(u: ScalarField, alpha: float, radii: Sequence[float], workers: int | None = None) -> MonotoneProfile:
    radii = [float(R) for R in radii]
    if not radii:
        raise ValueError("radii must not be empty")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    g = u.grid
    for R in radii:
        if R < 2 * g.h * (1 - 1e-12):
            raise RadiusError(f"profile radius {R} below 2h = {2 * g.h:.6g}")
        g.check_radius(R, margin=2.0)
    # populate shared caches before any threads touch them
    u.node_gradient
    u.second_differences

    def row(R):
        e = energy_term(u, R, alpha)
        b = boundary_term(u, R, alpha)
        return ProfileRow(R, e, b, e - b, drift(u, R, alpha))

    workers = workers or thread_count()
    if workers > 1 and len(radii) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, radii))
    else:
        rows = [row(R) for R in radii]
    return MonotoneProfile(alpha, rows)


def monotonicity_violation(p: MonotoneProfile) -> float:
    """Largest drop ``A(R_k) - A(R_{k+1})`` between consecutive radii, 0 if none."""
    A = p.A
    if A.size < 2:
        return 0.0
    return float(max(0.0, np.max(A[:-1] - A[1:])))


def _cumulative_drift(p: MonotoneProfile) -> np.ndarray:
    d = p.drifts
    return np.concatenate(([0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(p.radii))))


def drift_integral(p: MonotoneProfile, i: int, j: int) -> float:
    """Trapezoid integral of the drift over ``[R_i, R_j]`` on the profile's radii."""
    cum = _cumulative_drift(p)
    return float(cum[j] - cum[i])


def weiss_slack(p: MonotoneProfile) -> np.ndarray:
    """Matrix of ``A(s_j) - A(s_i) - int_{s_i}^{s_j} drift`` for ``i < j`` (NaN elsewhere)."""
    A = p.A
    n = A.size
    cum = _cumulative_drift(p)
    out = np.full((n, n), np.nan)
    iu = np.triu_indices(n, k=1)
    out[iu] = (A[iu[1]] - A[iu[0]]) - (cum[iu[1]] - cum[iu[0]])
    return out


def weiss_violation(p: MonotoneProfile) -> float:
    """Worst shortfall of the telescoped drift inequality over all pairs, 0 if none."""
    s = weiss_slack(p)
    if np.all(np.isnan(s)):
        return 0.0
    return float(max(0.0, -np.nanmin(s)))
