import math

import pytest
from helpers import approx
from hypothesis import given, strategies as st

from shuttlenoise import (
    HBAR,
    AuxiliaryState,
    PhysicalSystem,
    excitation_energy,
    final_energy,
    to_dimensionless,
)
from shuttlenoise.errors import InvalidParameterError, SingularStateError


def test_oscillator_length_of_calcium(ca40):
    units = to_dimensionless(ca40)
    expected = math.sqrt(1.054571817e-34 / (6.642e-26 * 2 * math.pi * 1.41e6))
    assert units.length_scale == approx(expected, rel=1e-14)
    assert units.length_scale == approx(1.339e-8, rel=1e-3)


def test_identity_units():
    sysu = PhysicalSystem(mass=HBAR, omega0=1.0)
    assert to_dimensionless(sysu).energy_scale == HBAR


def test_dimensionless_distance(ca40):
    units = to_dimensionless(ca40)
    assert units.length(ca40.distance) == approx(2.091e4, rel=1e-3)


@pytest.mark.parametrize("kw", [dict(mass=0.0, omega0=1.0), dict(mass=1.0, omega0=-1.0),
                                dict(mass=1.0, omega0=1.0, distance=-1.0),
                                dict(mass=1.0, omega0=1.0, mode=-1)])
def test_invalid_system(kw):
    with pytest.raises(InvalidParameterError):
        PhysicalSystem(**kw)


def test_derived_scales(ca40):
    assert ca40.period == approx(2 * math.pi / ca40.omega0)
    assert ca40.energy_quantum == approx(HBAR * ca40.omega0)


def test_ground_state_energy(ca40):
    state = AuxiliaryState(1.0, 0.0, ca40.distance, 0.0)
    assert final_energy(state, ca40) == approx(0.5 * ca40.energy_quantum, rel=1e-15)


@pytest.mark.parametrize("n", [0, 1, 7])
def test_mode_energy(ca40, n):
    s = ca40.with_(mode=n)
    state = AuxiliaryState(1.0, 0.0, s.distance, 0.0)
    assert final_energy(state, s) == approx(s.energy_quantum * (n + 0.5), rel=1e-15)


def test_displaced_final_state(ca40):
    delta = 3e-9
    state = AuxiliaryState(1.0, 0.0, ca40.distance + delta, 0.0)
    extra = 0.5 * ca40.mass * ca40.omega0**2 * delta**2
    assert excitation_energy(state, ca40) == approx(extra, rel=1e-6)


def test_full_energy_formula(ca40):
    rho, rd, qc, qd = 1.1, 2e5, ca40.distance - 1e-8, 3e-3
    m, w, h = ca40.mass, ca40.omega0, ca40.hbar
    direct = (0.5 * m * w**2 * (qc - ca40.distance) ** 2
              + 0.25 * h * w * (1 + rho**4) / rho**2
              + 0.5 * m * qd**2 + 0.25 * h / w * rd**2)
    assert final_energy(AuxiliaryState(rho, rd, qc, qd), ca40) == approx(direct, rel=1e-12)


@pytest.mark.parametrize("rho", [0.0, -0.5])
def test_singular_rho(ca40, rho):
    with pytest.raises(SingularStateError):
        final_energy(AuxiliaryState(rho, 0.0, 0.0, 0.0), ca40)


finite = dict(allow_nan=False, allow_infinity=False)


@given(rho=st.floats(1e-3, 1e3), rd=st.floats(-10, 10, **finite),
       dq=st.floats(-50, 50, **finite), qd=st.floats(-50, 50, **finite),
       n=st.integers(0, 20))
def test_energy_bounded_below(rho, rd, dq, qd, n):
    s = PhysicalSystem(mass=1.0, omega0=1.0, distance=100.0, mode=n, hbar=1.0)
    e = final_energy(AuxiliaryState(rho, rd, 100.0 + dq, qd), s)
    assert e >= (n + 0.5) * (1 - 1e-15)


@given(mass=st.floats(1e-30, 1e-20), omega0=st.floats(1e3, 1e9), x=st.floats(-1e-3, 1e-3))
def test_unit_round_trip(mass, omega0, x):
    u = to_dimensionless(PhysicalSystem(mass=mass, omega0=omega0))
    assert u.length_si(u.length(x)) == approx(x, rel=1e-14, abs=1e-300)
    assert u.time_si(u.time(x)) == approx(x, rel=1e-14, abs=1e-300)
    assert u.energy_si(u.energy(x)) == approx(x, rel=1e-14, abs=1e-300)


@given(rho=st.floats(0.5, 2.0), rd=st.floats(-1, 1), dq=st.floats(-5, 5), qd=st.floats(-5, 5))
def test_energy_unit_invariance(ca40, rho, rd, dq, qd):
    # stationary trap: avoids the (d + dq) - d cancellation, which is not a unit issue
    sysd = ca40.with_(distance=0.0)
    u = to_dimensionless(sysd)
    osc = sysd.oscillator()
    state_o = AuxiliaryState(rho, rd, dq, qd)
    state_si = AuxiliaryState(rho, rd * ca40.omega0, u.length_si(state_o.qc),
                              qd * u.length_scale * ca40.omega0)
    e_si = final_energy(state_si, sysd)
    assert u.energy_si(final_energy(state_o, osc)) == approx(e_si, rel=1e-12)
