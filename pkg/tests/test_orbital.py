"""Orbit-state conversions against closed-form and conservation oracles."""
import math

import numpy as np
import pytest

from dragplan.orbital import (
    CartesianState,
    EarthConstants,
    OrbitalElements,
    WGS84,
    cartesian_to_elements,
    elements_to_cartesian,
    normalize_angle,
    orbital_period,
    wrap_half_open,
)

MU = WGS84.mu


def test_circular_equatorial_at_node():
    oe = OrbitalElements(a=7e6, e=0.0, i=0.0, raan=0.0, argp=0.0, nu=0.0)
    s = elements_to_cartesian(oe)
    v_circ = math.sqrt(MU / 7e6)
    assert s.r == pytest.approx((7e6, 0.0, 0.0), abs=1e-6)
    assert s.v[0] == pytest.approx(0.0, abs=1e-9)
    assert s.v[1] == pytest.approx(v_circ, rel=1e-12)
    assert s.v[2] == pytest.approx(0.0, abs=1e-12)


def test_round_trip_iss_like():
    oe = OrbitalElements(a=6.9e6, e=0.005, i=math.radians(51.5),
                         raan=1.2, argp=0.7, nu=2.1)
    back = cartesian_to_elements(elements_to_cartesian(oe))
    assert back.a == pytest.approx(oe.a, rel=1e-9)
    assert back.e == pytest.approx(oe.e, rel=1e-9)
    assert back.i == pytest.approx(oe.i, rel=1e-9)
    assert back.raan == pytest.approx(oe.raan, abs=1e-9)
    assert back.argp == pytest.approx(oe.argp, abs=1e-9)
    assert back.nu == pytest.approx(oe.nu, abs=1e-9)


def test_speed_at_iss_altitude():
    # circular speed sqrt(mu/a) at 440 km altitude
    a = 6.818137e6
    oe = OrbitalElements(a=a, e=0.0, i=math.radians(51.5), raan=0.0,
                         argp=0.0, nu=math.radians(90.0))
    s = elements_to_cartesian(oe)
    assert s.v_mag() == pytest.approx(math.sqrt(MU / a), rel=1e-12)
    assert s.v_mag() == pytest.approx(7646.0, abs=0.5)


def test_cartesian_to_elements_trivial():
    s = CartesianState(r=(7e6, 0.0, 0.0), v=(0.0, math.sqrt(MU / 7e6), 0.0))
    oe = cartesian_to_elements(s)
    assert oe.a == pytest.approx(7e6, rel=1e-12)
    assert oe.e < 1e-12
    assert oe.theta == pytest.approx(0.0, abs=1e-12)


def test_raan_follows_z_rotation():
    oe = OrbitalElements(a=7e6, e=0.0, i=math.radians(51.5), raan=0.0, argp=0.0, nu=0.0)
    s = elements_to_cartesian(oe)
    for phi in (0.4, 2.0, 5.5):
        c, sn = math.cos(phi), math.sin(phi)
        rot = lambda v: (c * v[0] - sn * v[1], sn * v[0] + c * v[1], v[2])
        rotated = CartesianState(r=rot(s.r), v=rot(s.v))
        back = cartesian_to_elements(rotated)
        assert back.raan == pytest.approx(normalize_angle(phi), abs=1e-10)
        assert back.i == pytest.approx(oe.i, abs=1e-12)


def test_random_leo_round_trip_conservation():
    rng = np.random.RandomState(42)
    for _ in range(100):
        oe = OrbitalElements(
            a=rng.uniform(6.6e6, 7.4e6),
            e=rng.uniform(0.0, 0.05),
            i=rng.uniform(0.1, math.pi - 0.1),
            raan=rng.uniform(0.0, 2 * math.pi),
            argp=rng.uniform(0.0, 2 * math.pi),
            nu=rng.uniform(0.0, 2 * math.pi),
        )
        s = elements_to_cartesian(oe)
        back = cartesian_to_elements(s)
        s2 = elements_to_cartesian(back)
        # energy and angular momentum preserved through the round trip
        assert s2.specific_energy(WGS84) == pytest.approx(s.specific_energy(WGS84), rel=1e-10)
        h1 = np.array(s.angular_momentum())
        h2 = np.array(s2.angular_momentum())
        assert np.linalg.norm(h1 - h2) / np.linalg.norm(h1) < 1e-10
        assert back.a == pytest.approx(oe.a, rel=1e-9)


def test_energy_matches_elements():
    oe = OrbitalElements(a=6.82e6, e=0.01, i=1.0, raan=2.0, argp=3.0, nu=4.0)
    s = elements_to_cartesian(oe)
    assert s.specific_energy(WGS84) == pytest.approx(-MU / (2 * oe.a), rel=1e-10)


def test_orbital_period_values():
    # closed form 2*pi*sqrt(a^3/mu)
    a_iss = 6.818137e6
    assert orbital_period(a_iss) == pytest.approx(2 * math.pi * math.sqrt(a_iss ** 3 / MU), rel=1e-14)
    assert orbital_period(a_iss) == pytest.approx(5603.0, abs=1.0)
    a_sso = 6.928137e6
    assert orbital_period(a_sso) == pytest.approx(5739.0, abs=4.0)


def test_keplers_third_law_scaling():
    a = 7e6
    assert orbital_period(4 * a) == pytest.approx(8 * orbital_period(a), rel=1e-12)


def test_angle_normalization_idempotent():
    for x in (-7.0, -1e-12, 0.0, 1.0, 2 * math.pi, 15.0):
        y = normalize_angle(x)
        assert 0.0 <= y < 2 * math.pi
        assert normalize_angle(y) == y


def test_wrap_half_open_range():
    assert wrap_half_open(math.pi) == pytest.approx(math.pi)
    assert wrap_half_open(-math.pi) == pytest.approx(math.pi)
    assert wrap_half_open(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_half_open(0.25) == pytest.approx(0.25)
    assert wrap_half_open(2 * math.pi - 0.25) == pytest.approx(-0.25)


def test_rejects_invalid_elements():
    with pytest.raises(ValueError):
        OrbitalElements(a=7e6, e=1.2, i=0.0, raan=0.0, argp=0.0, nu=0.0)
    with pytest.raises(ValueError):
        elements_to_cartesian(OrbitalElements(a=-1.0, e=0.0, i=0.0, raan=0.0, argp=0.0, nu=0.0))


def test_rejects_degenerate_state():
    s = CartesianState(r=(7e6, 0.0, 0.0), v=(100.0, 0.0, 0.0))  # radial motion
    with pytest.raises(ValueError):
        cartesian_to_elements(s)


def test_constants_validation():
    with pytest.raises(ValueError):
        EarthConstants(mu=-1.0)
    # zeroed J terms are allowed for experiments, but not earthlike
    c = EarthConstants(j=(0.0, 0.0, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        c.validate_earthlike()
    WGS84.validate_earthlike()
