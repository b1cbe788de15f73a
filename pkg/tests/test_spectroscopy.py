import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from terasense.constants import DEFAULT
from terasense.errors import DomainError, InconsistentMeasurementError, SingularMeasurementError
from terasense.spectroscopy import (
    OpticalConstants, ReflectionMeasurement, TransmissionMeasurement,
    absorption_from_extinction, fresnel_normal, fresnel_oblique, invert_reflection,
    invert_transmission, invert_transmission_spectrum, transmission_forward, unwrap_phase,
)

C = DEFAULT.speed_of_light


def test_measurement_types():
    m = ReflectionMeasurement(0.25, 0.3)
    assert m.reflection_coefficient == 0.5
    assert m.complex_reflectivity == pytest.approx(0.5 * cmath.exp(0.3j))
    with pytest.raises(DomainError):
        ReflectionMeasurement(1.5, 0.0)
    with pytest.raises(DomainError):
        TransmissionMeasurement(0.0, 0.0, 1e-3, 1e12)
    oc = OpticalConstants(2.0, 0.1, frequency=1e12)
    assert oc.absorption == pytest.approx(4 * math.pi * 1e12 * 0.1 / C)


# ---------------------------------------------------------------- reflection

def test_fresnel_oblique_index_matched():
    for theta in (0.0, 0.3, 1.2):
        rs, rp, tr = fresnel_oblique(1.0, theta)
        assert abs(rs) < 1e-15 and abs(rp) < 1e-15
        assert tr == pytest.approx(theta)


def test_fresnel_oblique_reduces_to_normal(rng):
    for _ in range(200):
        n, chi = rng.uniform(0.2, 10), rng.uniform(0, 2)
        rs, rp, _ = fresnel_oblique(complex(n, chi), 0.0)
        r_normal = ((n - 1) + 1j * chi) / ((n + 1) + 1j * chi)
        assert abs(rs - r_normal) < 1e-15
        assert abs(rp - r_normal) < 1e-15


def test_fresnel_oblique_bounded_grid():
    n = np.linspace(1.0 + 1e-3, 10.0, 200)[:, None]
    theta = np.linspace(0.0, math.pi / 2 - 1e-6, 200)[None, :]
    rs, rp, _ = fresnel_oblique(n, theta)
    assert np.all(np.abs(rs) <= 1 + 1e-12)
    assert np.all(np.abs(rp) <= 1 + 1e-12)
    with pytest.raises(DomainError):
        fresnel_oblique(2.0, math.pi / 2)


def test_fresnel_normal_examples():
    r, R, phi = fresnel_normal(1.0, 0.0)
    assert r == 0 and R == 0
    r, R, phi = fresnel_normal(3.0, 0.0)
    assert r == pytest.approx(0.5) and phi == 0.0
    r, R, phi = fresnel_normal(2.0, 1.0)
    oracle = (1 + 1j) / (3 + 1j)
    assert r == pytest.approx(abs(oracle), rel=1e-15)
    assert R == pytest.approx(abs(oracle) ** 2, rel=1e-15)
    assert phi == pytest.approx(cmath.phase(oracle), rel=1e-15)


def test_invert_reflection_examples():
    oc = invert_reflection(0.0, 0.0)
    assert (oc.n, oc.chi) == (1.0, 0.0)
    oc = invert_reflection(0.25, 0.0)
    assert oc.n == pytest.approx(3.0) and oc.chi == 0.0
    _, R, phi = fresnel_normal(2.5, 0.3)
    oc = invert_reflection(R, phi)
    assert oc.n == pytest.approx(2.5, rel=1e-9)
    assert oc.chi == pytest.approx(0.3, rel=1e-9)
    with pytest.raises(DomainError):
        invert_reflection(1.0, 0.0)


def test_invert_reflection_singular():
    # R -> 1 with phi -> 0: the denominator 1 + R - 2 sqrt(R) cos(phi) vanishes
    with pytest.raises(SingularMeasurementError):
        invert_reflection(1.0 - 1e-15, 0.0)


@given(n=st.floats(1.0 + 1e-6, 10.0), chi=st.floats(0.0, 1.0))
def test_reflection_roundtrip_property(n, chi):
    _, R, phi = fresnel_normal(n, chi)
    oc = invert_reflection(R, phi)
    assert oc.n == pytest.approx(n, rel=1e-9)
    assert oc.chi == pytest.approx(chi, rel=1e-9, abs=1e-12)


@given(n=st.floats(0.1, 20.0), chi=st.floats(0.0, 5.0))
def test_reflectivity_passive_bound(n, chi):
    r, R, _ = fresnel_normal(n, chi)
    assert r <= 1.0 and 0.0 <= R <= 1.0


# ---------------------------------------------------------------- absorption & transmission

def test_absorption_from_extinction():
    assert absorption_from_extinction(1e12, 0.0) == 0.0
    assert absorption_from_extinction(1e12, 0.01) == pytest.approx(4 * math.pi * 1e12 * 0.01 / C, rel=1e-15)
    assert absorption_from_extinction(2e12, 0.01) == pytest.approx(2 * absorption_from_extinction(1e12, 0.01), rel=1e-15)
    with pytest.raises(DomainError):
        absorption_from_extinction(0.0, 0.1)


def test_transmission_forward_examples():
    assert transmission_forward(1.0, 0.0, 1e-3, 1e12) == pytest.approx(1.0 + 0j)
    n = np.linspace(0.5, 10, 100)
    T = transmission_forward(n, 0.0, 1e-3, 1e12)
    np.testing.assert_allclose(np.abs(T), 4 * n / (1 + n) ** 2, rtol=1e-14)
    assert np.all(np.abs(T) <= 1 + 1e-15)
    T = transmission_forward(2.0, 0.05, 1e-3, 1e12)
    assert abs(T) == pytest.approx(8 / 9 * math.exp(-2 * math.pi * 1e12 * 0.05 * 1e-3 / C), rel=1e-14)


def test_invert_transmission_examples():
    oc = invert_transmission(1.0, 0.0, 1e-3, 1e12)
    assert (oc.n, oc.chi, oc.absorption) == (1.0, 0.0, 0.0)
    T = transmission_forward(1.8, 0.05, 1e-3, 1e12)
    phi = 2 * math.pi * 1e12 * 0.8 * 1e-3 / C
    oc = invert_transmission(abs(T), phi, 1e-3, 1e12)
    assert oc.n == pytest.approx(1.8, rel=1e-9)
    assert oc.chi == pytest.approx(0.05, rel=1e-9)


def test_invert_transmission_errors_and_clamp():
    with pytest.raises(InconsistentMeasurementError):
        invert_transmission(0.5, -100.0, 1e-3, 1e12)
    with pytest.warns(RuntimeWarning):
        oc = invert_transmission(1.0, 2 * math.pi * 1e12 * 1e-3 / C, 1e-3, 1e12)  # n = 2, |T| > 8/9
    assert oc.chi == 0.0 and oc.absorption == 0.0
    with pytest.raises(DomainError):
        invert_transmission(0.0, 0.0, 1e-3, 1e12)


def test_eq10_identity_with_extinction(rng):
    f = rng.uniform(1e11, 3e12, 1000)
    d = rng.uniform(1e-4, 5e-3, 1000)
    n = rng.uniform(1.01, 5, 1000)
    chi = rng.uniform(0, 0.5, 1000)
    phi = 2 * math.pi * f * (n - 1) * d / C
    T = np.abs(transmission_forward(n, chi, d, f))
    oc = invert_transmission(T, phi, d, f)
    np.testing.assert_allclose(oc.absorption, 4 * math.pi * f * oc.chi / C, rtol=1e-13, atol=1e-12)


@given(n=st.floats(1.0 + 1e-6, 10.0), chi=st.floats(1e-6, 1.0),
       d=st.floats(1e-4, 2e-3), f=st.floats(1e11, 2e12))
def test_transmission_roundtrip_property(n, chi, d, f):
    T = transmission_forward(n, chi, d, f)
    phi = 2 * math.pi * f * (n - 1) * d / C
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        oc = invert_transmission(abs(T), phi, d, f)
    assert oc.n == pytest.approx(n, rel=1e-9)
    assert oc.chi == pytest.approx(chi, rel=1e-9)


def test_unwrap_phase_recovers_absolute_phase():
    f = np.linspace(0.2e12, 2.0e12, 400)
    n, chi, d = 2.2, 0.02, 1.5e-3
    T = transmission_forward(n, chi, d, f)
    true = 2 * math.pi * f * (n - 1) * d / C
    np.testing.assert_allclose(unwrap_phase(f, np.angle(T)), true, rtol=1e-12)
    oc = invert_transmission_spectrum(f, T, d)
    np.testing.assert_allclose(oc.n, n, rtol=1e-9)
    np.testing.assert_allclose(oc.chi, chi, rtol=1e-9)
