"""Blow-up rescalings ``u_R(x) = u(R x) / R^alpha`` and the homogeneous-or-zero
classification of their limit."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import RadiusError
from .grid import GridSpec, ScalarField, ball_integral, circle_points, gradient_at, sample
from .weiss import A_value


def rescale(u: ScalarField, R: float, alpha: float, target: GridSpec, corrected: bool = True) -> ScalarField:
    src = u.grid
    if not (R > 0 and R * target.L <= (src.L - src.h) * (1 + 1e-12)):
        raise RadiusError(f"rescaled window R*L_target = {R * target.L:.6g} exceeds L - h = {src.L - src.h:.6g}")
    x1, x2 = target.mesh()
    pts = R * np.stack([x1, x2], axis=-1)
    return ScalarField(target, sample(u, pts, corrected=corrected) / R**alpha)


def _annulus_integral(grid: GridSpec, vals: np.ndarray, r_in: float, r_out: float) -> float:
    return ball_integral(grid, vals, r_out) - ball_integral(grid, vals, r_in)


def homogeneity_deviation(v: ScalarField, alpha: float, annulus: tuple[float, float],
                          floor: float = 1e-30) -> float:
    """Normalized Euler-relation defect ``int (x . grad v - alpha v)^2 / int v^2`` over the annulus."""
    g = v.grid
    r_in, r_out = annulus
    if not (2 * g.h * (1 - 1e-12) <= r_in < r_out):
        raise RadiusError(f"annulus ({r_in}, {r_out}) must satisfy 2h <= r_in < r_out")
    g.check_radius(r_out, margin=2.0)
    x1, x2 = g.mesh()
    g1, g2 = v.node_gradient
    euler = x1 * g1 + x2 * g2 - alpha * v.values
    num = _annulus_integral(g, euler**2, r_in, r_out)
    den = _annulus_integral(g, v.values**2, r_in, r_out)
    return max(num, 0.0) / max(den, floor)


def scaling_gaps(u: ScalarField, R: float, s_values: Sequence[float], alpha: float,
                 target: Optional[GridSpec] = None) -> list[float]:
    """``|A(sR, u) - A(s, u_R)|`` for each ``s``."""
    target = target or u.grid
    uR = rescale(u, R, alpha, target)
    return [abs(A_value(u, s * R, alpha) - A_value(uR, s, alpha)) for s in s_values]


def verify_scaling_identity(u: ScalarField, R: float, s_values: Sequence[float], alpha: float,
                            target: Optional[GridSpec] = None) -> float:
    """Largest gap in the scaling identity ``A(sR, u) = A(s, u_R)``; zero in the continuum."""
    return max(scaling_gaps(u, R, s_values, alpha, target))


@dataclass(frozen=True)
class Thresholds:
    zero_rel: float = 1e-4
    homogeneous: float = 1e-2

    @classmethod
    def from_dict(cls, d: dict) -> "Thresholds":
        unknown = set(d) - {"zero_rel", "homogeneous"}
        if unknown:
            raise KeyError(f"unknown threshold key(s): {sorted(unknown)}")
        return cls(float(d.get("zero_rel", 1e-4)), float(d.get("homogeneous", 1e-2)))


@dataclass
class BlowupReport:
    alpha: float
    radii: list
    deviations: list
    sup_norms: list
    successive_distances: list
    classification: str
    profile_radius: float = 0.0
    profile_angles: list = field(default_factory=list)
    profile_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "radii": self.radii,
            "deviations": self.deviations,
            "sup_norms": self.sup_norms,
            "successive_distances": self.successive_distances,
            "classification": self.classification,
            "profile": {"radius": self.profile_radius, "angles": self.profile_angles,
                        "values": self.profile_values},
        }

    def to_json(self, path=None, extra: Optional[dict] = None) -> str:
        d = self.to_dict()
        if extra:
            d.update(extra)
        text = json.dumps(d, indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_csv(self, path=None) -> str:
        lines = ["R,deviation,sup_norm"]
        lines += [f"{R:.17g},{d:.17g},{s:.17g}" for R, d, s in zip(self.radii, self.deviations, self.sup_norms)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def blowup_radii(R0: float, count: int) -> list[float]:
    """``R0 * 2^(-k/2)`` for ``k = 0 .. count-1``."""
    return [R0 * 2 ** (-k / 2) for k in range(count)]


def _settled(d: Sequence[float], floor: float) -> bool:
    last = list(d[-3:])
    return all(b <= a or b <= floor for a, b in zip(last, last[1:])) and last[-1] <= max(last[0], floor)


def classify(u: ScalarField, alpha: float, radii: Sequence[float], thresholds: Thresholds = Thresholds(),
             target: Optional[GridSpec] = None, annulus: tuple[float, float] = (0.25, 0.75),
             n_angles: int = 64) -> BlowupReport:
    """Rescale ``u`` at each radius (decreasing) and classify the trend.

    Zero: final sup-norm below ``zero_rel * max(1, sup|u|)``. Homogeneous:
    final Euler defect below ``homogeneous`` and the successive C^0 distances
    on the annulus no longer growing over the last three steps (distances under
    ``homogeneous`` times the final sup-norm count as settled). Otherwise
    Undetermined.
    """
    radii = [float(R) for R in radii]
    if len(radii) < 4:
        raise ValueError("classification needs at least 4 radii")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("blow-up radii must be strictly decreasing")
    target = target or GridSpec(1.0, 257)
    r_in, r_out = annulus
    ring = (target.radius >= r_in) & (target.radius <= r_out)

    rescaled = [rescale(u, R, alpha, target) for R in radii]
    sups = [v.sup_norm() for v in rescaled]
    devs = [homogeneity_deviation(v, alpha, annulus) for v in rescaled]
    dists = [float(np.max(np.abs(b.values[ring] - a.values[ring]))) for a, b in zip(rescaled, rescaled[1:])]

    eps_zero = thresholds.zero_rel * max(1.0, u.sup_norm())
    r0 = 0.5 * (r_in + r_out)
    th, pts = circle_points(r0, n_angles)
    if sups[-1] < eps_zero:
        label = "Zero"
    elif devs[-1] < thresholds.homogeneous and _settled(dists, thresholds.homogeneous * sups[-1]):
        label = "Homogeneous"
    else:
        label = "Undetermined"
    prof = sample(rescaled[-1], pts, corrected=True) / r0**alpha if label == "Homogeneous" else np.array([])
    return BlowupReport(alpha, radii, devs, sups, dists, label, r0 if label == "Homogeneous" else 0.0,
                        [float(t) for t in th] if label == "Homogeneous" else [],
                        [float(x) for x in prof])


def holder_quotient(u: ScalarField, radii: Sequence[float], alpha: float, n_angles: int = 128) -> list[float]:
    """``max_theta |grad u(r theta)| / r^(alpha-1)`` at each radius."""
    g = u.grid
    out = []
    for r in radii:
        if r < 2 * g.h * (1 - 1e-12):
            raise RadiusError(f"radius {r} below 2h = {2 * g.h:.6g}")
        g.check_radius(r)
        _, pts = circle_points(r, n_angles)
        grad = gradient_at(u, pts)
        out.append(float(np.max(np.hypot(grad[:, 0], grad[:, 1]))) / r ** (alpha - 1))
    return out
