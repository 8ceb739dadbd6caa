import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anomaly_forge.errors import ParameterError
from anomaly_forge.models import (
    AffineProfile,
    BianchiI,
    BianchiII,
    CircleSpin,
    Cylinder,
    SampledProfile,
    SphereReference,
    TimeWindow,
    constant_profile,
    plateau_profile,
    smoothstep_polynomial,
    validate_product_structure,
)

W = TimeWindow(0.0, 1.0)


def test_constant_zero_profile():
    p = plateau_profile(0.0, 0.0, TimeWindow(-3.0, 5.0), 0.1)
    t = np.linspace(-3, 5, 101)
    assert np.all(p.value(t) == 0.0)
    assert np.all(p.derivative(t) == 0.0)


def test_plateau_values_on_both_ends():
    p = plateau_profile(0.3, 2.7, W, 0.2)
    assert np.all(p.value(np.linspace(0.0, 0.2, 21)) == 0.3)
    assert np.all(p.value(np.linspace(0.8, 1.0, 21)) == 2.7)


def test_midpoint_derivative_matches_finite_difference():
    p = plateau_profile(0.0, 1.0, W, 0.1)
    h = 1e-5
    fd = (p.value(0.5 + h) - p.value(0.5 - h)) / (2 * h)
    assert p.derivative(0.5) > 0
    assert p.derivative(0.5) == pytest.approx(fd, rel=1e-8)
    fd2 = (p.derivative(0.5 + h) - p.derivative(0.5 - h)) / (2 * h)
    assert p.second_derivative(0.5) == pytest.approx(fd2, abs=1e-6)


def test_smoothstep_is_flat_to_fifth_order_at_both_ends():
    poly = smoothstep_polynomial(5)
    assert poly(0.0) == 0.0 and poly(1.0) == pytest.approx(1.0)
    for nu in range(1, 6):
        d = poly.deriv(nu)
        assert d(0.0) == pytest.approx(0.0, abs=1e-9)
        assert d(1.0) == pytest.approx(0.0, abs=1e-9)
    assert np.all(poly.deriv(1)(np.linspace(0.01, 0.99, 99)) > 0)


@pytest.mark.parametrize("r", [0.0, 0.5, -0.1, 0.7])
def test_ramp_fraction_out_of_range(r):
    with pytest.raises(ParameterError):
        plateau_profile(0.0, 1.0, W, r)


def test_degenerate_window_rejected():
    with pytest.raises(ParameterError):
        TimeWindow(1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(
    v0=st.floats(-10, 10),
    v1=st.floats(-10, 10),
    r=st.floats(0.01, 0.49),
    t1=st.floats(-5, 5),
    dt=st.floats(0.1, 10),
)
def test_plateau_constant_and_validates_exactly(v0, v1, r, t1, dt):
    w = TimeWindow(t1, t1 + dt)
    p = plateau_profile(v0, v1, w, r)
    (a0, a1), (b0, b1) = p.end_segments()
    assert np.all(p.value(np.linspace(a0, a1, 33)) == v0)
    assert np.all(p.value(np.linspace(b0, b1, 33)) == v1)
    assert np.all(p.second_derivative(np.linspace(a0, a1, 33)) == 0.0)
    model = Cylinder(2.0, CircleSpin.TRIVIAL, p, w)
    report = validate_product_structure(model, tol=0.0)
    assert report.passed and report.maxima == {"gauge": 0.0}


def test_profile_monotone_between_plateaus():
    p = plateau_profile(2.0, -1.0, W, 0.25)
    v = p.value(np.linspace(0, 1, 401))
    assert np.all(np.diff(v) <= 0)


def test_affine_gauge_fails_validation_with_unit_maximum():
    model = Cylinder(2 * np.pi, CircleSpin.TRIVIAL, AffineProfile(0.0, 1.0, W), W)
    report = validate_product_structure(model, tol=1e-12)
    assert not report.passed
    assert report.maxima["gauge"] == 1.0
    assert report.failing() == ["gauge"]


def test_bianchi_ii_plateaus_pass():
    m = BianchiII(plateau_profile(1, 2, W), plateau_profile(0.5, 3, W), 2, W)
    assert validate_product_structure(m).passed
    assert validate_product_structure(SphereReference(2)).passed


def test_sampled_profile_keeps_plateaus():
    vals = [1.0, 1.0, 1.0, 1.5, 2.5, 3.0, 3.0, 3.0]
    p = SampledProfile(tuple(vals), W, end_fraction=2 / 7)
    assert np.allclose(p.value(p.times), vals)
    (a0, a1), (b0, b1) = p.end_segments()
    assert np.all(p.derivative(np.linspace(a0, a1, 50)) == 0.0)
    assert np.all(p.value(np.linspace(b0, b1, 50)) == 3.0)
    m = BianchiI(p, p, p, 0, W)
    assert validate_product_structure(m).passed


def test_model_invariants():
    with pytest.raises(ParameterError):
        BianchiI(plateau_profile(1, -1, W), constant_profile(1, W), constant_profile(1, W), 0, W)
    with pytest.raises(ParameterError):
        BianchiI(constant_profile(1, W), constant_profile(1, W), constant_profile(1, W), 8, W)
    with pytest.raises(ParameterError):
        BianchiII(constant_profile(1, W), constant_profile(1, W), 4, W)
    with pytest.raises(ParameterError):
        Cylinder(0.0, "trivial", constant_profile(0, W), W)
    with pytest.raises(ParameterError):
        Cylinder(1.0, "trivial", constant_profile(0, TimeWindow(0, 2)), W)
    with pytest.raises(ParameterError):
        SphereReference(0)
    assert Cylinder(1.0, "nontrivial", constant_profile(0, W), W).spin is CircleSpin.NONTRIVIAL
