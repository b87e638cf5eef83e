"""Independent 1-D oracle for radially symmetric obstacle problems on the unit disc.

The reduced energy is ``int_0^1 u'(r)^2 r dr`` with ``u(1) = g1`` and the
natural (zero-flux) condition at ``r = 0``. Harmonic radial functions are
``a + b log r``, so a single contact disc ``[0, r*]`` gives the closed form
``u = phi(r*) + phi'(r*) r* log(r / r*)`` beyond the free boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numba
import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError


@dataclass(frozen=True, eq=False)
class RadialProblem:
    phi: Callable[[np.ndarray], np.ndarray]
    g1: float
    N: int = 16384
    dphi: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.N < 8:
            raise ValueError("N must be at least 8")
        if self.g1 < float(self.phi(np.array([1.0]))[0]) - 1e-14:
            raise ValueError("boundary value g1 lies below the obstacle at r = 1")


@dataclass(frozen=True, eq=False)
class RadialSolution:
    r: np.ndarray
    u: np.ndarray
    sweeps: int
    active_set_steps: int

    def __call__(self, rr):
        return np.interp(rr, self.r, self.u)

    def to_csv(self, path=None) -> str:
        text = "r,u\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(self.r, self.u))
        if path is not None:
            Path(path).write_text(text)
        return text


def _stencil(N: int):
    """Weights of the discrete energy ``sum r_{i+1/2} (u_{i+1} - u_i)^2 / dr``."""
    dr = 1.0 / N
    rhalf = (np.arange(N) + 0.5) * dr  # r_{i+1/2}, i = 0..N-1
    left = np.concatenate(([0.0], rhalf[:-1]))  # r_{i-1/2} for i = 0..N-1
    right = rhalf  # r_{i+1/2}
    return left, right


@numba.njit(cache=True)
def _sweeps(u, phi, left, right, omega, n):
    N = left.size
    for _ in range(n):
        for i in range(N):
            lo = u[i - 1] if i > 0 else 0.0
            gs = (left[i] * lo + right[i] * u[i + 1]) / (left[i] + right[i])
            v = (1.0 - omega) * u[i] + omega * gs
            u[i] = v if v > phi[i] else phi[i]


@numba.njit(cache=True)
def _residual(u, phi, left, right):
    N = left.size
    res = 0.0
    for i in range(N):
        lo = u[i - 1] if i > 0 else 0.0
        d = left[i] + right[i]
        a = u[i] - (left[i] * lo + right[i] * u[i + 1]) / d
        gap = u[i] - phi[i]
        v = abs(a if a < gap else gap)
        if v > res:
            res = v
    return res


def _psor_level(u, phi, tol, max_sweeps):
    N = u.size - 1
    left, right = _stencil(N)
    omega = 2.0 / (1.0 + math.sin(math.pi / (2 * N)))
    res = _residual(u, phi, left, right)
    hist = [res]
    n = 0
    chunk = max(10, N // 8)
    while res > tol:
        if n >= max_sweeps:
            raise ConvergenceError(f"radial PSOR stopped at residual {res:.3e} after {n} sweeps", hist)
        _sweeps(u, phi, left, right, omega, chunk)
        n += chunk
        res = _residual(u, phi, left, right)
        hist.append(res)
    return n


def _active_set_polish(u, phi, max_steps=50):
    """Primal-dual active set iterations on the tridiagonal system; exact at termination."""
    N = u.size - 1
    left, right = _stencil(N)
    diag = left + right
    g1 = u[N]
    active = u[:N] <= phi[:N]
    for step in range(1, max_steps + 1):
        ab = np.zeros((3, N))
        rhs = np.zeros(N)
        inact = ~active
        ab[1] = np.where(inact, diag, 1.0)
        ab[0, 1:] = np.where(inact[:-1], -right[:-1], 0.0)  # super-diagonal: A[i, i+1]
        ab[2, :-1] = np.where(inact[1:], -left[1:], 0.0)  # sub-diagonal: A[i+1, i]
        rhs[inact] = 0.0
        rhs[N - 1] += right[N - 1] * g1 if inact[N - 1] else 0.0
        rhs[active] = phi[:N][active]
        u[:N] = solve_banded((1, 1), ab, rhs)
        lo = np.concatenate(([0.0], u[:N - 1]))
        lam = diag * u[:N] - left * lo - right * u[1:]
        new_active = (lam + (phi[:N] - u[:N])) > 0
        if np.array_equal(new_active, active):
            return step
        active = new_active
    raise ConvergenceError("active-set iteration did not settle")


def solve_radial(p: RadialProblem, tol: float = 1e-9, polish: bool = True,
                 max_sweeps: int = 2_000_000) -> RadialSolution:
    """Minimize the reduced energy above ``phi``.

    Projected SOR on the weighted three-point stencil, started from a coarse
    level and prolonged by interpolation up to ``N`` cells; the final level is
    then settled by active-set iterations, which terminate at the exact
    discrete complementarity solution.
    """
    levels = [p.N]
    while levels[-1] > 64 and levels[-1] % 2 == 0:
        levels.append(levels[-1] // 2)
    levels.reverse()
    u = None
    r_prev = None
    sweeps = 0
    for N in levels:
        r = np.linspace(0.0, 1.0, N + 1)
        phi = np.asarray(p.phi(r), dtype=float)
        if u is None:
            u = np.maximum(phi, p.g1)
        else:
            u = np.maximum(np.interp(r, r_prev, u), phi)
        u[N] = p.g1
        sweeps += _psor_level(u, phi, tol, max_sweeps)
        r_prev = r
    steps = _active_set_polish(u, phi) if polish else 0
    return RadialSolution(r_prev, u, sweeps, steps)


def radial_residual(sol: RadialSolution, phi: Callable) -> float:
    """Complementarity residual of a radial solution, in units of ``u``."""
    N = sol.r.size - 1
    left, right = _stencil(N)
    return float(_residual(sol.u, np.asarray(phi(sol.r), dtype=float), left, right))


def refinement_change(p: RadialProblem) -> float:
    """Sup-norm change at the common nodes when ``N`` is doubled."""
    coarse = solve_radial(p)
    fine = solve_radial(RadialProblem(p.phi, p.g1, 2 * p.N, p.dphi))
    return float(np.max(np.abs(fine.u[::2] - coarse.u)))


def _derivative(phi, dphi):
    if dphi is not None:
        return dphi
    def d(r, eps=1e-6):
        return (phi(r + eps) - phi(r - eps)) / (2 * eps)
    return d


def matching_radius(phi: Callable, g1: float, dphi: Optional[Callable] = None,
                    xtol: float = 1e-12) -> Optional[float]:
    """Free-boundary radius ``r*`` of the single-contact-disc solution, or None.

    ``r*`` solves ``phi(r) - phi'(r) r log r = g1``, i.e. the C^1 continuation
    of the obstacle by ``a + b log r`` reaches ``g1`` at ``r = 1``. Returns
    None when the constant ``g1`` already clears the obstacle (no contact).
    """
    dphi = _derivative(phi, dphi)

    def F(r):
        return float(phi(np.array([r]))[0] - dphi(np.array([r]))[0] * r * math.log(r) - g1)

    grid = np.linspace(0.0, 1.0, 4097)[1:]
    phis = np.asarray(phi(grid), dtype=float)
    if np.all(phis <= g1):
        return None
    vals = np.array([F(r) for r in grid])
    sign = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    if sign.size == 0:
        if vals[0] <= 0:
            return None
        lo, hi = grid[-1], 1.0
    else:
        lo, hi = grid[sign[-1]], grid[sign[-1] + 1]
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def matching_solution(phi: Callable, g1: float, r, dphi: Optional[Callable] = None) -> np.ndarray:
    """Semi-analytic radial solution at radii ``r`` (contact disc plus log branch)."""
    r = np.asarray(r, dtype=float)
    rs = matching_radius(phi, g1, dphi)
    if rs is None:
        return np.full_like(r, float(g1))
    d = _derivative(phi, dphi)
    p0 = float(phi(np.array([rs]))[0])
    b = float(d(np.array([rs]))[0]) * rs
    with np.errstate(divide="ignore"):
        outer = p0 + b * np.log(np.where(r > 0, r, 1.0) / rs)
    return np.where(r <= rs, phi(r), outer)
