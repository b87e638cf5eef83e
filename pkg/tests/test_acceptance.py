"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are written past
pytest's output capture so they always appear in the log.
"""

import json
import math

import numpy as np
import pytest

from conftest import ALPHA, homogeneous_field
from obstacle_lab.blowup import blowup_radii, classify, scaling_gaps
from obstacle_lab.cli import main
from obstacle_lab.config import load_config
from obstacle_lab.grid import GridSpec, ScalarField, ball_integral
from obstacle_lab.obstacles import BoundaryData
from obstacle_lab.radial import RadialProblem, matching_radius, solve_radial
from obstacle_lab.solver import ProblemSpec, ball_mode_solve, solve
from obstacle_lab.weiss import (drift_integral, energy_identity_check, geometric_radii, monotonicity_violation,
                                profile, weiss_slack)

R_STAR = 0.4320674818252781  # brentq root of 0.5 - r^2 + 2 r^2 ln r = 0, frozen


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number} ({title}): {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def _profile_of(solution):
    cfg, res = solution
    return profile(res.u, cfg.alpha, cfg.profile_radii)


def test_criterion_01_quadrature_convergence(verdict):
    errs = {m: abs(ball_integral(GridSpec(1.0, m), np.ones((m, m)), 0.5) - math.pi / 4) for m in (257, 513)}
    drop = errs[257] / errs[513]
    ok = errs[257] < 1e-3 and drop >= 3.0
    verdict(1, "quadrature convergence", ok,
            f"error {errs[257]:.3e} at m=257 (< 1e-3), {errs[513]:.3e} at m=513, drop {drop:.2f}x (>= 3)")


def test_criterion_02_homogeneous_constancy(verdict):
    g = GridSpec(1.0, 513)
    radii = geometric_radii(0.1, 0.6, 2 ** 0.25)
    prof = profile(homogeneous_field(g), ALPHA, radii)
    spread = float(np.ptp(prof.A))
    worst_drift = float(prof.drifts.max())
    ok = spread <= 5e-3 and worst_drift <= 1e-3 and radii[0] == 0.1 and radii[-1] <= 0.6
    verdict(2, "homogeneous constancy of A", ok,
            f"max A - min A = {spread:.3e} (<= 5e-3), max drift = {worst_drift:.3e} (<= 1e-3) "
            f"over {len(radii)} radii in [0.1, 0.6]")


def test_criterion_03_energy_identity(verdict):
    R = 0.75
    out = {}
    for m in (257, 513):
        g = GridSpec(1.0, m)
        chk = energy_identity_check(ScalarField.from_function(g, lambda a, b: a), R, ALPHA)
        out[m] = (chk, g.h)
    analytic = 3.25 * math.pi / 3 * R**2
    chk, h = out[257]
    fine, _ = out[513]
    ok = (abs(chk.gap) <= 10 * h and abs(fine.gap) < abs(chk.gap)
          and abs(chk.rhs - analytic) <= 10 * h and abs(fine.rhs - analytic) <= 10 * h)
    verdict(3, "energy identity", ok,
            f"|gap| {abs(chk.gap):.3e} at m=257 (<= 10h = {10 * h:.3e}), {abs(fine.gap):.3e} at m=513; "
            f"|rhs - 3.25 pi R^2/3| = {abs(chk.rhs - analytic):.1e}")


def test_criterion_04_solver_oracle(verdict):
    g = GridSpec(1.0, 257)
    res = ball_mode_solve(ProblemSpec(g, lambda a, b: 0.5 - a * a - b * b, BoundaryData("constant", 0.0),
                                      tol=1e-12), 1.0)
    oracle = solve_radial(RadialProblem(lambda r: 0.5 - r**2, 0.0, dphi=lambda r: -2 * r))
    c = g.center
    r = g.coords[c:]
    u = res.u.values
    rays = [u[c:, c], u[c, c:], u[c::-1, c], u[c, c::-1]]
    sup = max(float(np.max(np.abs(ray - oracle(r)))) for ray in rays)
    r_root = matching_radius(lambda r: 0.5 - r**2, 0.0, lambda r: -2 * r)
    r_contact = float(g.radius[res.contact_mask].max())
    ok = sup <= 10 * g.h and abs(r_contact - r_root) <= 3 * g.h and abs(r_root - R_STAR) < 1e-11
    verdict(4, "solver-oracle equivalence", ok,
            f"sup error along axes {sup:.3e} (<= 10h = {10 * g.h:.3e}); discrete contact radius {r_contact:.5f} "
            f"vs r* = {r_root:.5f} (|diff| {abs(r_contact - r_root):.2e} <= 3h = {3 * g.h:.2e})")


def test_criterion_05_monotonicity(verdict, compliant_257, compliant_513):
    cfg, res = compliant_513
    p513, p257 = _profile_of(compliant_513), _profile_of(compliant_257)
    v513, v257 = monotonicity_violation(p513), monotonicity_violation(p257)
    radii = p513.radii
    ok = (res.tol == 1e-10 and res.final_residual <= 1e-10 and res.contact_mask[cfg.grid.center, cfg.grid.center]
          and radii[0] == pytest.approx(0.05) and radii[-1] <= 0.5
          and bool(np.all(np.diff(p513.A) >= -1e-4)) and v513 <= v257 / 2)
    verdict(5, "monotonicity of A", ok,
            f"m=513: worst drop {v513:.3e} (allowed 1e-4), smallest step {np.diff(p513.A).min():.3e}; "
            f"m=257 worst drop {v257:.3e}; tightening v513 <= v257/2 holds: {v513 <= v257 / 2}; "
            f"{res.iterations} sweeps, contact at origin")


def test_criterion_06_weiss_inequality(verdict, compliant_513):
    p = _profile_of(compliant_513)
    slack = weiss_slack(p)
    worst = float(np.nanmin(slack))
    i, j = np.unravel_index(np.nanargmin(slack), slack.shape)
    pairs = int(np.count_nonzero(~np.isnan(slack)))
    ok = worst >= -5e-4
    verdict(6, "discrete Weiss inequality", ok,
            f"min over {pairs} pairs of A(s2)-A(s1)-int drift = {worst:.3e} (>= -5e-4) at "
            f"s1={p.radii[i]:.4f}, s2={p.radii[j]:.4f}; drift integral there {drift_integral(p, i, j):.3e}")


def test_criterion_07_scaling_identity(verdict, compliant_257, compliant_513):
    s_values = [0.4, 0.6, 0.8]
    gaps = {}
    for m, (cfg, res) in ((257, compliant_257), (513, compliant_513)):
        gaps[m] = {R: max(scaling_gaps(res.u, R, s_values, cfg.alpha)) for R in (0.5, 0.25)}
    worst513 = max(gaps[513].values())
    worst257 = max(gaps[257].values())
    shrinks = all(gaps[513][R] < gaps[257][R] for R in (0.5, 0.25))
    ok = worst513 <= 5e-3 and shrinks
    verdict(7, "scaling identity", ok,
            f"max gap {worst513:.3e} at m=513 (<= 5e-3), {worst257:.3e} at m=257; "
            f"per R at m=513 {', '.join(f'R={R}: {v:.2e}' for R, v in gaps[513].items())}; shrinks: {shrinks}")


def test_criterion_08_dichotomy(verdict, configs):
    cfg = load_config(configs["zero"])
    res = solve(cfg.problem())
    zero = classify(res.u, cfg.alpha, cfg.blowup_radii, cfg.thresholds, cfg.blowup_grid, cfg.annulus)
    g = GridSpec(1.0, 257)
    homog = classify(homogeneous_field(g), ALPHA, blowup_radii(0.5, 6))
    a = 1 + 0.3 * np.cos(np.array(homog.profile_angles))
    err = float(np.max(np.abs(np.array(homog.profile_values) - a))) if homog.profile_values else math.inf
    ok = zero.classification == "Zero" and homog.classification == "Homogeneous" and err <= 1e-2
    verdict(8, "dichotomy", ok,
            f"phi=-r^1.5, g=0 -> {zero.classification}; synthetic injection -> {homog.classification} "
            f"with profile sup error {err:.2e} (<= 1e-2) over {len(homog.profile_angles)} angles")


def test_criterion_09_hypothesis_gate(verdict, configs, capsys):
    expected = {"zero": 0, "compliant_peak": 0, "homogeneous_peak": 0, "rising_profile": 0, "violating": 4}
    codes = {name: main(["verify-obstacle", "--config", str(configs[name])]) for name in expected}
    capsys.readouterr()
    ok = codes == expected
    verdict(9, "hypothesis gate", ok, f"exit codes {codes}")


def _run_all(config, out):
    codes = [main([cmd, "--config", str(config), "--out", str(out)]) for cmd in ("solve", "profile", "blowup")]
    return codes, {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_criterion_10_determinism(verdict, configs, tmp_path, capsys):
    mismatched, counted = [], 0
    for name, path in configs.items():
        codes_a, a = _run_all(path, tmp_path / name / "a")
        codes_b, b = _run_all(path, tmp_path / name / "b")
        counted += len(a)
        if codes_a != codes_b or a != b or codes_a != [0, 0, 0]:
            mismatched.append(name)
        hashes = {json.loads(a[f])["config_hash"] for f in ("solution.json", "profile.json", "blowup.json")}
        if len(hashes) != 1:
            mismatched.append(f"{name} (config hash)")
    capsys.readouterr()
    verdict(10, "determinism", not mismatched,
            f"{counted} artifacts across {len(configs)} shipped configs byte-identical on rerun; "
            f"mismatches: {mismatched or 'none'}")


def test_info_homogeneous_obstacle_dip(configs, capsys):
    """Not a criterion: the equality-case obstacle shows the O(h^2) energy dip where
    B_R first meets the free boundary. Reported for the record, never gating."""
    cfg = load_config(configs["homogeneous_peak"])
    res = solve(cfg.problem())
    p = profile(res.u, cfg.alpha, cfg.profile_radii)
    with capsys.disabled():
        print(f"\n[INFO] homogeneous_peak at m={cfg.grid.m}: worst drop of A {monotonicity_violation(p):.3e}, "
              f"weiss slack min {np.nanmin(weiss_slack(p)):.3e}")
