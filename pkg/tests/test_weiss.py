import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import homogeneous_field
from obstacle_lab.errors import RadiusError
from obstacle_lab.grid import GridSpec, ScalarField, sample
from obstacle_lab.weiss import (A_value, MonotoneProfile, ProfileRow, boundary_term, cone_extension, drift,
                                drift_integral, energy_identity_check, energy_term, geometric_radii,
                                monotonicity_violation, profile, weiss_slack, weiss_violation)

ALPHA = 1.5
PI_ALPHA = math.pi * ALPHA  # 4.71238898...


@pytest.fixture(scope="module")
def g257():
    return GridSpec(1.0, 257)


@pytest.fixture(scope="module")
def wide():
    """A grid whose unit circle sits safely inside the domain."""
    return GridSpec(1.25, 321)


def x1_field(g):
    return ScalarField.from_function(g, lambda a, b: a)


def test_energy_term_examples(g257):
    h = g257.h
    assert abs(energy_term(x1_field(g257), 0.5, ALPHA) - 2 * math.pi) < 5 * h
    assert energy_term(ScalarField.constant(g257, 3.0), 0.5, ALPHA) == 0.0
    r15 = homogeneous_field(g257, cos1=0.0)
    for R in (0.2, 0.5, 0.8):
        assert abs(energy_term(r15, R, ALPHA) - PI_ALPHA) < 5 * h


def test_boundary_term_examples(g257, wide):
    assert boundary_term(ScalarField.constant(wide, 1.0), 1.0, ALPHA) == pytest.approx(3 * math.pi, rel=1e-14)
    r15 = homogeneous_field(g257, cos1=0.0)
    for R in (0.1, 0.35, 0.9):
        assert boundary_term(r15, R, ALPHA) == pytest.approx(2 * PI_ALPHA, rel=1e-4)
    assert abs(boundary_term(x1_field(g257), 0.25, ALPHA) - 18.84955592153876) < g257.h**2


def test_A_value_examples(g257):
    r15 = homogeneous_field(g257, cos1=0.0)
    vals = [A_value(r15, R, ALPHA) for R in (0.1, 0.3, 0.6, 0.9)]
    assert max(abs(v + PI_ALPHA) for v in vals) < 5 * g257.h
    c = 0.7
    const = ScalarField.constant(g257, c)
    for R in (0.2, 0.5):
        assert A_value(const, R, ALPHA) == pytest.approx(-2 * PI_ALPHA * c**2 * R ** (-2 * ALPHA), rel=1e-13)
    assert A_value(ScalarField.constant(g257, 0.0), 0.5, ALPHA) == 0.0


def test_radius_errors(g257):
    u = x1_field(g257)
    with pytest.raises(RadiusError):
        A_value(u, 1.0, ALPHA)
    with pytest.raises(RadiusError):
        drift(u, g257.h / 2, ALPHA)
    with pytest.raises(RadiusError):
        drift(u, 1 - 1.5 * g257.h, ALPHA)


def test_drift_examples(g257, wide):
    assert drift(homogeneous_field(g257), 0.5, ALPHA) < 1e-3
    c = 0.8
    assert drift(ScalarField.constant(wide, c), 1.0, ALPHA) == pytest.approx(4.5 * math.pi * c**2, rel=1e-13)
    assert drift(x1_field(g257), 0.5, ALPHA) == pytest.approx(math.pi, abs=1e-10)


def test_cone_extension_examples(g257):
    R = 0.5
    u = homogeneous_field(g257)
    w = cone_extension(u, R, ALPHA)
    inside = g257.radius <= R
    assert np.max(np.abs(w.values[inside] - u.values[inside])) < 1e-4
    assert np.array_equal(w.values[~inside], u.values[~inside])
    one = cone_extension(ScalarField.constant(g257, 1.0), R, ALPHA)
    np.testing.assert_allclose(one.values[inside], (g257.radius[inside] / R) ** ALPHA, atol=1e-14)
    assert one.values[g257.center, g257.center] == 0.0
    # trace matching: exact at nodes on the circle, O(h) between them (w has a kink at |x| = R)
    v = ScalarField.from_function(g257, lambda a, b: np.sin(2 * a) + b**2)
    wv = cone_extension(v, R, ALPHA)
    on_circle = np.isclose(g257.radius, R, rtol=0, atol=1e-12)
    assert on_circle.sum() >= 4
    np.testing.assert_allclose(wv.values[on_circle], v.values[on_circle], atol=1e-14)
    th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    pts = R * np.stack([np.cos(th), np.sin(th)], axis=-1)
    assert np.max(np.abs(sample(wv, pts) - sample(v, pts))) < g257.h


def test_energy_identity_examples(wide):
    chk = energy_identity_check(x1_field(wide), 1.0, ALPHA)
    assert chk.rhs == pytest.approx(3.25 * math.pi / 3, abs=1e-10)
    assert abs(chk.gap) <= 10 * wide.h
    c = 0.6
    chk = energy_identity_check(ScalarField.constant(wide, c), 1.0, ALPHA)
    assert chk.rhs == pytest.approx(PI_ALPHA * c**2, rel=1e-13)
    assert abs(chk.lhs - PI_ALPHA * c**2) <= 10 * wide.h
    chk = energy_identity_check(ScalarField.constant(wide, 0.0), 1.0, ALPHA)
    assert chk.lhs == chk.rhs == chk.gap == 0.0


def test_energy_identity_gap_shrinks():
    gaps = []
    for m in (129, 257, 513):
        g = GridSpec(1.0, m)
        u = ScalarField.from_function(g, lambda a, b: np.cos(a) * np.exp(b))
        gaps.append(abs(energy_identity_check(u, 0.75, ALPHA).gap))
    # first order: each halving of h cuts the gap roughly in half
    assert gaps[0] / gaps[1] > 1.8 and gaps[1] / gaps[2] > 1.8


def test_profile_homogeneous(g257):
    radii = geometric_radii(0.1, 0.5)
    prof = profile(homogeneous_field(g257, cos1=0.0), ALPHA, radii)
    assert np.allclose(prof.A, -PI_ALPHA, atol=5 * g257.h)
    assert np.max(prof.drifts) < 1e-3
    for row in prof.rows:
        assert row.A == row.energy_term - row.boundary_term


def test_profile_constant(g257):
    c = -0.4
    radii = [0.1, 0.2, 0.4]
    prof = profile(ScalarField.constant(g257, c), ALPHA, radii, workers=1)
    np.testing.assert_allclose(prof.A, [-2 * PI_ALPHA * c**2 * R ** (-2 * ALPHA) for R in radii], rtol=1e-13)
    assert monotonicity_violation(prof) == 0.0


def test_profile_threads_match_serial(g257):
    u = ScalarField.from_function(g257, lambda a, b: np.sin(3 * a) * b + a**2)
    radii = geometric_radii(0.05, 0.8)
    a = profile(u, ALPHA, radii, workers=1)
    b = profile(u, ALPHA, radii, workers=4)
    assert a.to_csv() == b.to_csv()


def test_profile_validation(g257):
    u = x1_field(g257)
    with pytest.raises(RadiusError):
        profile(u, ALPHA, [g257.h, 0.5])
    with pytest.raises(RadiusError):
        profile(u, ALPHA, [0.5, 1.0 - g257.h])
    with pytest.raises(ValueError):
        profile(u, ALPHA, [0.5, 0.3])
    with pytest.raises(ValueError):
        profile(u, ALPHA, [])


def test_profile_serialization(g257, tmp_path):
    prof = profile(homogeneous_field(g257), ALPHA, [0.1, 0.2, 0.3])
    text = prof.to_csv(tmp_path / "p.csv")
    assert text.splitlines()[0] == "R,energy_term,boundary_term,A,drift"
    assert len(text.splitlines()) == 4
    svg = prof.to_svg(tmp_path / "p.svg")
    assert svg.startswith("<svg") and svg == (tmp_path / "p.svg").read_text()
    assert svg == prof.to_svg()


def _toy_profile(A, d, R=None):
    R = R or [0.1 * (k + 1) for k in range(len(A))]
    return MonotoneProfile(ALPHA, [ProfileRow(r, 0.0, 0.0, a, x) for r, a, x in zip(R, A, d)])


def test_monotonicity_and_weiss_checks():
    p = _toy_profile([0.0, 1.0, 0.8, 2.0], [1.0, 1.0, 1.0, 1.0])
    assert monotonicity_violation(p) == pytest.approx(0.2)
    assert drift_integral(p, 0, 3) == pytest.approx(0.3)
    s = weiss_slack(p)
    assert s[1, 2] == pytest.approx(-0.3)
    assert np.isnan(s[2, 1]) and np.isnan(s[0, 0])
    assert weiss_violation(p) == pytest.approx(0.3)
    assert weiss_violation(_toy_profile([0.0, 1.0], [0.0, 0.0])) == 0.0
    assert monotonicity_violation(_toy_profile([1.0], [0.0])) == 0.0


def test_homogeneous_error_shrinks_under_refinement():
    spreads, drifts = [], []
    for m in (129, 257, 513):
        g = GridSpec(1.0, m)
        prof = profile(homogeneous_field(g), ALPHA, geometric_radii(0.1, 0.6))
        spreads.append(np.ptp(prof.A))
        drifts.append(prof.drifts.max())
    assert spreads[2] < spreads[0] / 2 and drifts[2] < drifts[0] / 2


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), R=st.floats(0.1, 0.8), alpha=st.floats(1.05, 1.95))
def test_drift_nonnegative_and_sign_invariance(seed, R, alpha):
    g = GridSpec(1.0, 33)
    vals = np.random.default_rng(seed).normal(size=(33, 33))
    u, v = ScalarField(g, vals), ScalarField(g, -vals)
    assert drift(u, R, alpha) >= 0.0
    assert A_value(v, R, alpha) == pytest.approx(A_value(u, R, alpha), rel=1e-12, abs=1e-12)
