"""Flattening coefficients checked against independently coded formulas."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from stripspec import (Interval, custom_profile, effective_potential,
                       jacobian_h, make_profile, overlap_a, potentials,
                       transverse_mode)
from stripspec.coefficients import coefficient_csv_rows

I66 = Interval(-6.0, 6.0, truncated=True)


def chi1(t):
    return math.sqrt(2.0) * math.sin(0.5 * math.pi * t)


def test_transverse_mode_endpoint_values():
    assert transverse_mode(0.0) == 0.0
    assert transverse_mode(1.0) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert transverse_mode(0.5) == pytest.approx(chi1(0.5), rel=1e-15)


def test_transverse_mode_normalized():
    val, _ = quad(lambda t: transverse_mode(t) ** 2, 0.0, 1.0)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_transverse_mode_satisfies_oscillator_equation():
    # -chi'' = (pi/2)^2 chi, checked with a second difference at h and h/2
    mu = (0.5 * math.pi) ** 2
    t = 0.37

    def resid(h):
        second = (transverse_mode(t + h) - 2 * transverse_mode(t)
                  + transverse_mode(t - h)) / h ** 2
        return abs(-second - mu * transverse_mode(t))

    assert resid(1e-3) < 1e-4
    assert resid(5e-4) < 4 * resid(1e-3) + 1e-12


def test_transverse_mode_rejects_outside_domain():
    with pytest.raises(ValueError):
        transverse_mode(-0.1)
    with pytest.raises(ValueError):
        transverse_mode(1.2)


def test_jacobian_reference_values():
    flat = make_profile("zero", (), Interval(0.0, 1.0))
    assert jacobian_h(flat, 0.1, 0.5, 0.7) == 1.0
    plus = make_profile("constant", (1.0,), Interval(0.0, 1.0))
    assert jacobian_h(plus, 0.1, 0.2, 1.0) == pytest.approx(0.9, rel=1e-15)
    minus = make_profile("constant", (-1.0,), Interval(0.0, 1.0))
    assert jacobian_h(minus, 0.1, 0.2, 0.5) == pytest.approx(1.05, rel=1e-15)


def test_potentials_vanish_for_straight_strip():
    flat = make_profile("zero", (), Interval(0.0, 1.0))
    point = potentials(flat, 0.1, 0.5, np.linspace(0, 1, 11))
    assert np.all(point.h == 1.0)
    for field in (point.v1, point.v2, point.v3, point.v4, point.v_boundary):
        assert np.all(field == 0.0)


def test_potentials_constant_curvature():
    c, eps, t = 0.8, 0.25, 0.6
    arc = make_profile("constant", (c,), Interval(0.0, 1.0))
    point = potentials(arc, eps, 0.3, t)
    h = 1.0 - c * eps * t
    assert point.v1 == pytest.approx(0.0, abs=0.0)
    assert point.v2 == pytest.approx(0.0, abs=0.0)
    assert point.v3 == pytest.approx(0.25 * c ** 2 / h ** 2, rel=1e-14)
    assert point.v4 == pytest.approx(c / (eps * h), rel=1e-14)
    assert point.v_boundary == pytest.approx(
        0.5 * c / (eps * (1.0 - eps * c)), rel=1e-14)


def test_potentials_gaussian_dip_reference_point():
    # independent evaluation of every field at (s, t) = (1, 1), eps = 0.1
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    eps, s, t = 0.1, 1.0, 1.0
    kappa = -math.exp(-1.0)
    kprime = 2.0 * math.exp(-1.0)
    h = 1.0 - kappa * eps * t
    point = potentials(dip, eps, s, t)
    assert point.h == pytest.approx(h, rel=1e-15)
    assert point.v1 == pytest.approx(0.25 * (kprime * eps * t) ** 2 / h ** 4,
                                     rel=1e-13)
    assert point.v2 == pytest.approx(kprime * eps * t / h ** 3, rel=1e-13)
    assert point.v3 == pytest.approx(0.25 * kappa ** 2 / h ** 2, rel=1e-13)
    assert point.v4 == pytest.approx(kappa / (eps * h), rel=1e-13)
    assert point.v_boundary == pytest.approx(
        0.5 * kappa / (eps * (1.0 - eps * kappa)), rel=1e-13)


def test_potentials_reject_bad_transverse_coordinate():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    with pytest.raises(ValueError):
        potentials(dip, 0.1, 0.0, 1.5)


def test_potential_scaling_in_eps():
    # v1 = O(eps^2) and v2 = O(eps) as the strip thins: the rescaled
    # suprema stay within a narrow band set by the Jacobian variation
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    s = np.linspace(-4.0, 4.0, 201)
    v1_scaled = []
    v2_scaled = []
    for eps in (0.2, 0.1, 0.05):
        point = potentials(dip, eps, s, 1.0)
        v1_scaled.append(np.max(np.abs(point.v1)) / eps ** 2)
        v2_scaled.append(np.max(np.abs(point.v2)) / eps)
    assert max(v1_scaled) / min(v1_scaled) < 1.6
    assert max(v2_scaled) / min(v2_scaled) < 1.6


def test_potential_magnitude_bounds():
    dip = make_profile("gaussian_dip", (2.0, 0.3, 1.2), I66)
    eps = 0.2
    s = np.linspace(-6.0, 6.0, 201)
    t = np.linspace(0.0, 1.0, 21)
    sup_k = dip.sup_abs_kappa
    sup_kp = float(np.max(np.abs(dip.kappa_prime(s))))
    h_min = 1.0 - eps * sup_k
    for ti in t:
        point = potentials(dip, eps, s, ti)
        assert np.all(point.v1 >= 0.0)
        assert np.all(point.v3 >= 0.0)
        assert np.all(np.abs(point.v1) <= 0.25 * (sup_kp * eps) ** 2
                      / h_min ** 4 + 1e-15)
        assert np.all(np.abs(point.v2) <= sup_kp * eps / h_min ** 3 + 1e-15)
        assert np.all(np.abs(point.v3) <= 0.25 * sup_k ** 2 / h_min ** 2
                      + 1e-15)


def test_effective_potential_variants():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    s = np.linspace(-3.0, 3.0, 13)
    eps = 0.1
    dn = effective_potential(dip, eps, "dn")
    np.testing.assert_array_equal(dn.value(s), dip.kappa(s) / eps)
    dd = effective_potential(dip, eps, "dirichlet")
    np.testing.assert_allclose(dd.value(s), -0.25 * dip.kappa(s) ** 2,
                               rtol=1e-15)
    rob = effective_potential(dip, eps, "robin", alpha=lambda x: 0.5 + 0 * x)
    np.testing.assert_allclose(rob.value(s), (dip.kappa(s) + 1.0) / eps,
                               rtol=1e-15)
    with pytest.raises(ValueError):
        effective_potential(dip, eps, "robin")
    with pytest.raises(ValueError):
        effective_potential(dip, eps, "mixed")


def test_overlap_straight_is_one():
    flat = make_profile("zero", (), Interval(0.0, 1.0))
    assert overlap_a(flat, 0.1, 0.5) == pytest.approx(1.0, abs=1e-14)


def test_overlap_matches_adaptive_quadrature():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    eps = 0.2
    for s in (-1.0, 0.0, 0.5, 2.0):
        kappa = float(dip.kappa(s))
        ref, _ = quad(lambda t: chi1(t) ** 2 / (1.0 - kappa * eps * t),
                      0.0, 1.0, epsabs=1e-13)
        assert overlap_a(dip, eps, s) == pytest.approx(ref, abs=1e-12)


def test_overlap_vectorized_and_bracketed():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    s = np.linspace(-6.0, 6.0, 101)
    vals = overlap_a(dip, 0.2, s)
    assert vals.shape == s.shape
    lo = 1.0 / (1.0 - 0.2 * dip.inf_kappa)
    assert np.all(vals >= lo - 1e-12)
    assert np.all(vals <= 1.0 + 1e-12)  # kappa <= 0 here, so a <= 1


def test_potentials_require_derivative():
    bare = custom_profile(lambda s: 0.1 * np.asarray(s), Interval(0.0, 1.0))
    object.__setattr__(bare, "kappa_prime", None)
    with pytest.raises((TypeError, ValueError)):
        potentials(bare, 0.1, 0.5, 0.5)


def test_coefficient_csv_rows_shape():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    rows = list(coefficient_csv_rows(dip, 0.1, [0.0, 1.0], [0.0, 0.5, 1.0]))
    assert len(rows) == 6
    assert all(len(row) == len(rows[0]) for row in rows)
    assert rows[0][:2] == (0.0, 0.0)
    assert rows[-1][:2] == (1.0, 1.0)
