"""Uniform square grid, grid-sampled scalar fields, and the quadratures on
balls and circles that the monotonicity and blow-up diagnostics rely on.

Node ``(i, j)`` sits at ``(-L + i*h, -L + j*h)``; field values are stored as
an ``(m, m)`` array indexed ``[i, j]``, which flattens row-major.
"""

from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import OutOfDomainError, RadiusError

# slack for radii/points that sit on a limit up to rounding
_EDGE_SLACK = 1e-12


@dataclass(frozen=True)
class GridSpec:
    L: float
    m: int

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 5 and self.m % 2 == 1):
            raise ValueError(f"points_per_side must be an odd integer >= 5, got {self.m!r}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"half_extent must be positive, got {self.L!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.m - 1)

    @property
    def center(self) -> int:
        """Index of the node at the origin along either axis."""
        return (self.m - 1) // 2

    @cached_property
    def coords(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.m)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.coords, self.coords, indexing="ij")

    @cached_property
    def radius(self) -> np.ndarray:
        x1, x2 = self.mesh()
        return np.hypot(x1, x2)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros((self.m, self.m), dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    def check_radius(self, R: float, margin: float = 1.0) -> None:
        """Raise RadiusError unless ``0 < R <= L - margin*h``."""
        limit = self.L - margin * self.h
        if not (R > 0 and R <= limit * (1 + _EDGE_SLACK)):
            raise RadiusError(f"radius {R!r} outside (0, {limit:.6g}] for grid L={self.L}, m={self.m}")


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        m = self.grid.m
        if v.size != m * m:
            raise ValueError(f"expected {m * m} values for m={m}, got {v.size}")
        v = v.reshape(m, m)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: GridSpec, f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        x1, x2 = grid.mesh()
        return cls(grid, np.broadcast_to(f(x1, x2), (grid.m, grid.m)))

    @classmethod
    def constant(cls, grid: GridSpec, c: float) -> "ScalarField":
        return cls(grid, np.full((grid.m, grid.m), float(c)))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    @cached_property
    def node_gradient(self) -> tuple[np.ndarray, np.ndarray]:
        """Central differences inside, one-sided on the boundary frame."""
        g1, g2 = np.gradient(self.values, self.grid.h, edge_order=1)
        g1.flags.writeable = False
        g2.flags.writeable = False
        return g1, g2

    @cached_property
    def second_differences(self) -> tuple[np.ndarray, np.ndarray]:
        """Node-wise ``u_xx``, ``u_yy``; the boundary frame copies its inner neighbour."""
        v, h2 = self.values, self.grid.h ** 2
        dxx = np.empty_like(v)
        dyy = np.empty_like(v)
        dxx[1:-1, :] = (v[2:, :] - 2 * v[1:-1, :] + v[:-2, :]) / h2
        dxx[0, :], dxx[-1, :] = dxx[1, :], dxx[-2, :]
        dyy[:, 1:-1] = (v[:, 2:] - 2 * v[:, 1:-1] + v[:, :-2]) / h2
        dyy[:, 0], dyy[:, -1] = dyy[:, 1], dyy[:, -2]
        dxx.flags.writeable = False
        dyy.flags.writeable = False
        return dxx, dyy

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"{self.grid.m},{self.grid.L:.17g}\n")
        for row in self.values:
            buf.write(",".join(f"{v:.17g}" for v in row))
            buf.write("\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "ScalarField":
        """Parse CSV text, or read it from a path."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            source = Path(source).read_text()
        lines = [ln for ln in source.strip().splitlines() if ln.strip()]
        try:
            m_s, L_s = lines[0].split(",")
            grid = GridSpec(float(L_s), int(m_s))
            rows = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]])
        except (ValueError, IndexError) as exc:
            raise ValueError(f"malformed field CSV: {exc}") from exc
        if rows.shape != (grid.m, grid.m):
            raise ValueError(f"field CSV has shape {rows.shape}, header says m={grid.m}")
        return cls(grid, rows)


def _as_points(point) -> tuple[np.ndarray, bool]:
    p = np.asarray(point, dtype=float)
    scalar = p.ndim == 1
    p = np.atleast_2d(p)
    if p.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of 2")
    return p, scalar


def _bilinear(grid: GridSpec, values: np.ndarray, p: np.ndarray) -> np.ndarray:
    t = (p + grid.L) / grid.h
    idx = np.clip(np.floor(t).astype(int), 0, grid.m - 2)
    s = t - idx
    i, j = idx[..., 0], idx[..., 1]
    s1, s2 = s[..., 0], s[..., 1]
    return ((1 - s1) * (1 - s2) * values[i, j] + s1 * (1 - s2) * values[i + 1, j]
            + (1 - s1) * s2 * values[i, j + 1] + s1 * s2 * values[i + 1, j + 1])


def _check_inside(grid: GridSpec, p: np.ndarray, margin: float) -> None:
    limit = (grid.L - margin) * (1 + _EDGE_SLACK)
    if np.any(np.abs(p) > limit):
        worst = p[np.argmax(np.max(np.abs(p), axis=-1))]
        raise OutOfDomainError(f"point {tuple(worst)} outside [-{limit:.6g}, {limit:.6g}]^2")


def sample(f: ScalarField, point, *, corrected: bool = False):
    """Bilinear interpolation of ``f`` at one point or an ``(..., 2)`` array of points.

    With ``corrected=True`` the bilinear value is reduced by
    ``s(1-s) h^2/2 * u_xx + t(1-t) h^2/2 * u_yy`` (second differences,
    themselves interpolated), which removes the interpolant's curvature bias
    and makes the rule exact on quadratics. Node values and affine fields are
    reproduced exactly either way.
    """
    p, scalar = _as_points(point)
    _check_inside(f.grid, p, 0.0)
    out = _bilinear(f.grid, f.values, p)
    if corrected:
        g = f.grid
        t = (p + g.L) / g.h
        s = t - np.clip(np.floor(t), 0, g.m - 2)
        dxx, dyy = f.second_differences
        out = out - 0.5 * g.h**2 * (s[..., 0] * (1 - s[..., 0]) * _bilinear(g, dxx, p)
                                    + s[..., 1] * (1 - s[..., 1]) * _bilinear(g, dyy, p))
    return float(out[0]) if scalar else out


def gradient_at(f: ScalarField, point) -> np.ndarray:
    """Bilinearly interpolated node-wise central-difference gradient.

    Returns shape ``(2,)`` for a single point, ``(k, 2)`` for ``k`` points.
    Points must stay at least one spacing away from the domain edge.
    """
    p, scalar = _as_points(point)
    _check_inside(f.grid, p, f.grid.h)
    g1, g2 = f.node_gradient
    out = np.stack([_bilinear(f.grid, g1, p), _bilinear(f.grid, g2, p)], axis=-1)
    return out[0] if scalar else out


def _clipped_cell_area(x0: float, y0: float, h: float, R: float) -> float:
    """Area of the cell ``[x0, x0+h] x [y0, y0+h]`` inside the polygon that
    replaces each arc of the circle ``|x| = R`` crossing the cell by its chord."""
    corners = [(x0, y0), (x0 + h, y0), (x0 + h, y0 + h), (x0, y0 + h)]
    R2 = R * R
    poly = []
    for k in range(4):
        (ax, ay), (bx, by) = corners[k], corners[(k + 1) % 4]
        a_in = ax * ax + ay * ay <= R2
        if a_in:
            poly.append((ax, ay))
        # roots of |a + t (b - a)|^2 = R^2 on (0, 1)
        dx, dy = bx - ax, by - ay
        qa = dx * dx + dy * dy
        qb = 2 * (ax * dx + ay * dy)
        qc = ax * ax + ay * ay - R2
        disc = qb * qb - 4 * qa * qc
        if disc <= 0:
            continue
        sq = math.sqrt(disc)
        for t in sorted(((-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa))):
            if 0 < t < 1:
                poly.append((ax + t * dx, ay + t * dy))
    if len(poly) < 3:
        return 0.0
    xs = np.array([q[0] for q in poly])
    ys = np.array([q[1] for q in poly])
    return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))


@functools.lru_cache(maxsize=64)
def _disc_node_weights(L: float, m: int, R: float) -> np.ndarray:
    """Node weights ``W`` with ``sum(W * f)`` = sum over cells of the cell-average
    of ``f`` times the cell's overlap area with the disc of radius ``R``."""
    grid = GridSpec(L, m)
    h = grid.h
    lo = grid.coords[:-1]
    hi = grid.coords[1:]
    # nearest and farthest distance from the origin along each axis, per cell
    near = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    far = np.maximum(np.abs(lo), np.abs(hi))
    near2 = near[:, None] ** 2 + near[None, :] ** 2
    far2 = far[:, None] ** 2 + far[None, :] ** 2
    area = np.where(far2 <= R * R, h * h, 0.0)
    for i, j in zip(*np.nonzero((near2 < R * R) & (far2 > R * R))):
        area[i, j] = _clipped_cell_area(lo[i], lo[j], h, R)
    w = np.zeros((m, m))
    q = 0.25 * area
    w[:-1, :-1] += q
    w[1:, :-1] += q
    w[:-1, 1:] += q
    w[1:, 1:] += q
    w.flags.writeable = False
    return w


def ball_integral(grid: GridSpec, integrand, R: float) -> float:
    """Integral over the disc ``B_R`` of node-sampled ``integrand``."""
    grid.check_radius(R)
    vals = integrand.values if isinstance(integrand, ScalarField) else np.asarray(integrand, dtype=float)
    vals = vals.reshape(grid.m, grid.m)
    return float(np.sum(_disc_node_weights(grid.L, grid.m, float(R)) * vals))


def default_sphere_nodes(grid: GridSpec, R: float) -> int:
    return max(64, math.ceil(2 * math.pi * R / grid.h))


def circle_angles(K: int) -> np.ndarray:
    return 2 * np.pi * np.arange(K) / K


def circle_points(R: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Angles ``theta_k`` and the points ``R*(cos, sin)`` as a ``(K, 2)`` array."""
    th = circle_angles(K)
    return th, R * np.stack([np.cos(th), np.sin(th)], axis=-1)


def sphere_integral(f: Callable[[np.ndarray], np.ndarray], R: float, grid: GridSpec | None = None,
                    K: int | None = None) -> float:
    """Trapezoid rule for ``int_0^{2 pi} f(theta) d theta``.

    ``f`` receives the array of angles. When ``grid`` is given, the circle of
    radius ``R`` must fit in the domain, and ``K`` defaults to
    ``max(64, ceil(2 pi R / h))``.
    """
    if grid is not None:
        if not (R >= 0 and R <= grid.L * (1 + _EDGE_SLACK)):
            raise OutOfDomainError(f"circle of radius {R!r} leaves the domain [-{grid.L}, {grid.L}]^2")
        if K is None:
            K = default_sphere_nodes(grid, R)
    if K is None:
        K = 64
    if K < 16:
        raise ValueError(f"need at least 16 quadrature nodes, got {K}")
    vals = np.asarray(f(circle_angles(K)), dtype=float)
    return float(2 * np.pi / K * np.sum(np.broadcast_to(vals, (K,))))


def dirichlet_energy(u: ScalarField, R: float) -> float:
    """``int_{B_R} |grad u|^2`` from node-wise central differences."""
    g1, g2 = u.node_gradient
    return ball_integral(u.grid, g1 * g1 + g2 * g2, R)
