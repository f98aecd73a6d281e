"""Curvature profiles, admissibility checks, and the plane embedding."""

import math
import pickle

import numpy as np
import pytest

from stripspec import (Interval, SAFETY, StripProblem, custom_profile, embed,
                       make_profile, parse_profile, require_admissible,
                       validate)
from stripspec.geometry import min_nonadjacent_separation, write_embedding_csv

I66 = Interval(-6.0, 6.0, truncated=True)


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Interval(2.0, -2.0)
    assert Interval(-3.0, 5.0).length == 8.0


def test_interval_doubled_keeps_center():
    doubled = Interval(-2.0, 4.0, truncated=True).doubled()
    assert (doubled.a, doubled.b) == (-5.0, 7.0)
    assert doubled.truncated


def test_preset_zero_and_constant():
    flat = make_profile("zero", (), Interval(0.0, 1.0))
    assert flat.kappa(0.3) == 0.0
    assert flat.sup_abs_kappa == 0.0
    arc = make_profile("constant", (0.75,), Interval(0.0, 2.0))
    assert arc.kappa(1.7) == 0.75
    assert arc.kappa_prime(0.1) == 0.0
    assert arc.inf_kappa == 0.75
    assert arc.sup_abs_kappa == 0.75


def test_preset_gaussian_dip_values_and_bounds():
    dip = make_profile("gaussian_dip", (2.0, 0.5, 1.5), I66)
    s = 1.25
    expected = -2.0 * math.exp(-(((s - 0.5) / 1.5) ** 2))
    assert dip.kappa(s) == pytest.approx(expected, rel=1e-15)
    # centered minimum and analytic derivative
    assert dip.inf_kappa == -2.0
    assert dip.sup_abs_kappa == 2.0
    ds = 1e-6
    fd = (dip.kappa(s + ds) - dip.kappa(s - ds)) / (2 * ds)
    assert dip.kappa_prime(s) == pytest.approx(fd, rel=1e-8)


def test_preset_negcos_bounds():
    wave = make_profile("negcos", (), Interval(-math.pi, math.pi))
    assert wave.kappa(0.0) == pytest.approx(-1.0)
    assert wave.inf_kappa == pytest.approx(-1.0)
    assert wave.sup_abs_kappa == pytest.approx(1.0)
    assert wave.kappa_prime(0.5) == pytest.approx(math.sin(0.5), rel=1e-12)


def test_parse_profile_round_trip():
    prof = parse_profile("gaussian_dip:1,0,1", I66)
    assert prof.name == "gaussian_dip"
    assert prof.params == (1.0, 0.0, 1.0)
    assert parse_profile("zero", Interval(0.0, 1.0)).name == "zero"
    with pytest.raises(ValueError):
        parse_profile("spiral:1", I66)
    with pytest.raises(ValueError):
        parse_profile("constant:1,2", I66)


def test_custom_profile_fd_fallback():
    prof = custom_profile(lambda s: np.sin(s) ** 2, Interval(0.0, 3.0))
    assert prof.fd_fallback
    s = 1.1
    exact = 2 * math.sin(s) * math.cos(s)
    assert prof.kappa_prime(s) == pytest.approx(exact, abs=1e-7)
    with_derivative = custom_profile(np.sin, Interval(0.0, 3.0),
                                     kappa_prime=np.cos)
    assert not with_derivative.fd_fallback


def test_validate_reports_jacobian_range():
    arc = make_profile("constant", (1.0,), Interval(0.0, 1.0))
    report = validate(arc, eps=0.2)
    assert report.admissible
    assert report.eps_sup_kappa == pytest.approx(0.2)
    assert report.h_lower == pytest.approx(0.8)
    assert report.h_upper == pytest.approx(1.0)


def test_admissibility_threshold():
    arc = make_profile("constant", (1.0,), Interval(0.0, 1.0))
    assert validate(arc, eps=SAFETY).admissible
    bad = validate(arc, eps=SAFETY + 1e-6)
    assert not bad.admissible
    assert bad.messages
    with pytest.raises(ValueError):
        require_admissible(arc, eps=0.6)
    with pytest.raises(ValueError):
        validate(arc, eps=0.0)


def test_profile_pickles_with_preset_payload():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    clone = pickle.loads(pickle.dumps(dip))
    assert clone.kappa(0.7) == dip.kappa(0.7)
    assert clone.params == dip.params
    custom = custom_profile(np.sin, Interval(0.0, 1.0))
    with pytest.raises((pickle.PicklingError, TypeError, AttributeError)):
        pickle.dumps(custom)


def test_embed_straight_profile_is_segment():
    flat = make_profile("zero", (), Interval(0.0, 2.0))
    strip = embed(flat, eps=0.1, n_points=65)
    np.testing.assert_allclose(strip.base[:, 1], 0.0, atol=1e-14)
    np.testing.assert_allclose(strip.base[:, 0], np.linspace(0.0, 2.0, 65),
                               atol=1e-12)
    # parallel curve offset by eps along the left normal
    np.testing.assert_allclose(strip.parallel[:, 1], 0.1, atol=1e-12)


def test_embed_constant_curvature_is_circle():
    arc = make_profile("constant", (1.0,), Interval(0.0, 2 * math.pi))
    strip = embed(arc, eps=0.2, n_points=257)
    center = np.array([0.0, 1.0])
    radii = np.linalg.norm(strip.base - center, axis=1)
    np.testing.assert_allclose(radii, 1.0, atol=1e-9)
    inner = np.linalg.norm(strip.parallel - center, axis=1)
    np.testing.assert_allclose(inner, 0.8, atol=1e-9)
    # full loop closes
    assert np.linalg.norm(strip.base[-1] - strip.base[0]) < 1e-8


def test_embed_end_caps_connect_curves():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    strip = embed(dip, eps=0.1, n_points=129)
    np.testing.assert_allclose(strip.end_a[0], strip.base[0], atol=1e-12)
    np.testing.assert_allclose(strip.end_a[-1], strip.parallel[0], atol=1e-12)
    np.testing.assert_allclose(strip.end_b[0], strip.base[-1], atol=1e-12)
    np.testing.assert_allclose(strip.end_b[-1], strip.parallel[-1], atol=1e-12)


def test_embedded_strip_separation_positive():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    strip = embed(dip, eps=0.2, n_points=257)
    assert min_nonadjacent_separation(strip) > 0.0


def test_embedding_csv(tmp_path):
    arc = make_profile("constant", (0.5,), Interval(0.0, 1.0))
    out = tmp_path / "strip.csv"
    write_embedding_csv(embed(arc, eps=0.1, n_points=33), out,
                        header_lines=["demo"])
    lines = out.read_text().splitlines()
    assert lines[0] == "# demo"
    header = next(l for l in lines if not l.startswith("#"))
    assert header.split(",")[:3] == ["s", "x_base", "y_base"]
    assert len([l for l in lines if not l.startswith("#")]) == 34


def test_strip_problem_wiring():
    dip = make_profile("gaussian_dip", (1.0, 0.0, 1.0), I66)
    problem = StripProblem(dip, eps=0.1)
    assert problem.outer == "neumann"
    assert problem.threshold == pytest.approx((math.pi / 0.2) ** 2)
    dd = StripProblem(dip, eps=0.1, outer="dirichlet")
    assert dd.threshold == pytest.approx((math.pi / 0.1) ** 2)
    with pytest.raises(ValueError):
        StripProblem(dip, eps=0.1, outer="periodic")
    with pytest.raises(ValueError):
        StripProblem(dip, eps=0.1, outer="robin")  # alpha required
    robin = StripProblem(dip, eps=0.1, outer="robin", alpha=lambda s: 0 * s)
    assert robin.threshold == pytest.approx((math.pi / 0.2) ** 2)
    with pytest.raises(ValueError):
        StripProblem(dip, eps=0.9)
    doubled = problem.doubled()
    assert doubled.profile.interval.length == pytest.approx(24.0)
