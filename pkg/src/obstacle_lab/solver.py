"""Five-point discretization of the obstacle problem and its projected SOR solver.

The discrete problem is the complementarity system

    -Lap_h u >= 0,   u >= phi,   (-Lap_h u) (u - phi) = 0

on the free (interior) nodes, with ``u = g`` on the fixed nodes. Residuals
are measured with the Laplacian scaled by ``h^2``, i.e. in units of ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numba
import numpy as np

from .errors import ConvergenceError
from .grid import GridSpec, ScalarField
from .obstacles import BoundaryData, check_admissible

CHECK_EVERY = 10


@numba.njit(cache=True)
def _psor_sweeps(u, phi, free, omega, n):
    m1, m2 = u.shape
    for _ in range(n):
        for i in range(1, m1 - 1):
            for j in range(1, m2 - 1):
                if free[i, j]:
                    gs = 0.25 * (u[i - 1, j] + u[i + 1, j] + u[i, j - 1] + u[i, j + 1])
                    v = (1.0 - omega) * u[i, j] + omega * gs
                    u[i, j] = v if v > phi[i, j] else phi[i, j]


@numba.njit(cache=True)
def _lcp_residual(u, phi, free):
    m1, m2 = u.shape
    res = 0.0
    for i in range(1, m1 - 1):
        for j in range(1, m2 - 1):
            if free[i, j]:
                lap = 4.0 * u[i, j] - u[i - 1, j] - u[i + 1, j] - u[i, j - 1] - u[i, j + 1]
                gap = u[i, j] - phi[i, j]
                v = abs(lap if lap < gap else gap)
                if v > res:
                    res = v
    return res


def lcp_residual(u: np.ndarray, phi: np.ndarray, free: np.ndarray) -> float:
    """``max |min(-h^2 Lap_h u, u - phi)|`` over free nodes (array form)."""
    free = np.asarray(free, dtype=bool).copy()
    free[0, :] = free[-1, :] = free[:, 0] = free[:, -1] = False
    return float(_lcp_residual(np.asarray(u, dtype=float), np.asarray(phi, dtype=float), free))


def psor(u0: np.ndarray, phi: np.ndarray, free: np.ndarray, omega: float = 1.9, tol: float = 1e-10,
         max_iter: int = 500_000) -> tuple[np.ndarray, int, list[float]]:
    """Projected SOR on raw arrays; nodes outside ``free`` keep their ``u0`` values.

    Sweeps run in lexicographic order (first index outer). The residual is
    checked every ``CHECK_EVERY`` sweeps. Returns ``(u, sweeps, history)``;
    raises ConvergenceError (with the partial iterate) when ``max_iter`` is hit.
    """
    if not 0 < omega < 2:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    phi = np.ascontiguousarray(phi, dtype=float)
    free = np.asarray(free, dtype=bool).copy()
    free[0, :] = free[-1, :] = free[:, 0] = free[:, -1] = False
    u = np.array(u0, dtype=float)
    u[free] = np.maximum(u[free], phi[free])
    res = float(_lcp_residual(u, phi, free))
    history = [res]
    it = 0
    while res > tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"PSOR stopped after {it} sweeps with residual {res:.3e} > tol {tol:.3e}",
                history, partial=(u, it))
        n = min(CHECK_EVERY, max_iter - it)
        _psor_sweeps(u, phi, free, omega, n)
        it += n
        res = float(_lcp_residual(u, phi, free))
        history.append(res)
    return u, it, history


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    grid: GridSpec
    obstacle: Callable
    boundary: BoundaryData
    omega: float = 1.9
    tol: Optional[float] = None
    max_iter: int = 500_000

    def __post_init__(self):
        if not 0 < self.omega < 2:
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")

    def obstacle_values(self) -> np.ndarray:
        x1, x2 = self.grid.mesh()
        return np.broadcast_to(self.obstacle(x1, x2), (self.grid.m, self.grid.m)).astype(float)

    def boundary_values(self) -> np.ndarray:
        x1, x2 = self.grid.mesh()
        return np.broadcast_to(self.boundary(x1, x2), (self.grid.m, self.grid.m)).astype(float)

    def effective_tol(self, phi: np.ndarray, g_fixed: np.ndarray) -> float:
        if self.tol is not None:
            return self.tol
        return 1e-10 * max(1.0, float(np.max(np.abs(g_fixed))), float(np.max(np.abs(phi))))


@dataclass(eq=False)
class SolveResult:
    u: ScalarField
    contact_mask: np.ndarray
    iterations: int
    final_residual: float
    residual_history: list = field(default_factory=list)
    tol: float = 0.0

    @property
    def contact_count(self) -> int:
        return int(np.count_nonzero(self.contact_mask))

    def sidecar(self) -> dict:
        return {"iterations": self.iterations, "final_residual": self.final_residual,
                "contact_count": self.contact_count}


def _run(problem: ProblemSpec, phi: np.ndarray, fixed_vals: np.ndarray, free: np.ndarray) -> SolveResult:
    fixed = ~free
    check_admissible(fixed_vals, phi, fixed)
    tol = problem.effective_tol(phi, fixed_vals[fixed])
    u0 = np.where(free, np.maximum(phi, float(np.mean(fixed_vals[fixed]))), fixed_vals)
    try:
        u, it, hist = psor(u0, phi, free, problem.omega, tol, problem.max_iter)
    except ConvergenceError as exc:
        u, it = exc.partial
        exc.partial = _result(problem.grid, u, phi, it, exc.residual_history, tol)
        raise
    return _result(problem.grid, u, phi, it, hist, tol)


def _result(grid, u, phi, it, hist, tol) -> SolveResult:
    return SolveResult(ScalarField(grid, u), (u - phi) <= 10 * tol, it, hist[-1], list(hist), tol)


def solve(problem: ProblemSpec) -> SolveResult:
    """Solve on the whole square: the boundary frame carries ``g``."""
    grid = problem.grid
    free = ~grid.boundary_mask()
    return _run(problem, problem.obstacle_values(), problem.boundary_values(), free)


def ball_mode_solve(problem: ProblemSpec, R_dom: float) -> SolveResult:
    """Solve on the disc ``|x| < R_dom``; every other node is frozen to ``g(R_dom x/|x|)``."""
    grid = problem.grid
    if not (0 < R_dom <= grid.L):
        raise ValueError(f"R_dom must lie in (0, L={grid.L}], got {R_dom}")
    x1, x2 = grid.mesh()
    r = grid.radius
    free = (r < R_dom) & ~grid.boundary_mask()
    scale = np.where(r > 0, R_dom / np.where(r > 0, r, 1.0), 0.0)
    fixed_vals = np.where(free, 0.0, np.broadcast_to(problem.boundary(x1 * scale, x2 * scale), r.shape))
    return _run(problem, problem.obstacle_values(), fixed_vals, free)


def complementarity_residual(u: ScalarField, problem: ProblemSpec) -> float:
    """Residual of the square-domain problem at ``u`` (interior nodes)."""
    return lcp_residual(u.values, problem.obstacle_values(), ~problem.grid.boundary_mask())


def default_omega(m: int) -> float:
    """Optimal SOR factor for the unconstrained five-point Laplacian on an m x m grid."""
    return 2.0 / (1.0 + math.sin(math.pi / (m - 1)))
