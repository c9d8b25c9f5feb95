import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballistic_green.errors import DomainError
from ballistic_green.units import (ELECTRON_MASS_SI, ELECTRON_VOLT_SI, ELEMENTARY_CHARGE_SI, HBAR_SI, UnitSystem,
                                   convert_units)

KINDS = ["energy", "length", "time", "field", "force", "magnetic_field"]


@given(st.sampled_from(KINDS), st.floats(1e-30, 1e30), st.floats(1e-10, 1e-3))
def test_round_trip(kind, value, length):
    us = UnitSystem(length_si=length)
    back = convert_units(convert_units(value, kind, "si_to_natural", us), kind, "natural_to_si", us)
    assert back == pytest.approx(value, rel=1e-12)


def test_one_electron_volt():
    us = UnitSystem(length_si=1e-10)
    e0 = HBAR_SI ** 2 / (ELECTRON_MASS_SI * 1e-20)
    assert convert_units(ELECTRON_VOLT_SI, "energy", "si_to_natural", us) == pytest.approx(ELECTRON_VOLT_SI / e0,
                                                                                          rel=1e-14)
    # hbar^2 / (m_e * 1 Angstrom^2) is about 7.62 eV
    assert us.energy / ELECTRON_VOLT_SI == pytest.approx(7.61996, rel=1e-5)


def test_larmor_frequency_of_five_tesla():
    us = UnitSystem(length_si=1e-8)
    b = convert_units(5.0, "magnetic_field", "si_to_natural", us)
    omega_l_si = ELEMENTARY_CHARGE_SI * 5.0 / (2 * ELECTRON_MASS_SI)
    assert b / 2 == pytest.approx(omega_l_si * us.time, rel=1e-13)


def test_force_of_a_field_on_the_charge():
    us = UnitSystem(length_si=3e-9)
    f = convert_units(ELEMENTARY_CHARGE_SI * 4000.0, "force", "si_to_natural", us)
    assert f == pytest.approx(convert_units(4000.0, "field", "si_to_natural", us), rel=1e-14)


def test_arrays_pass_through():
    us = UnitSystem()
    x = np.array([1.0, 2.0, 3.0])
    assert np.allclose(convert_units(x, "length", "natural_to_si", us), x * 1e-8)


def test_bad_arguments():
    us = UnitSystem()
    with pytest.raises(DomainError):
        convert_units(1.0, "speed", "si_to_natural", us)
    with pytest.raises(DomainError):
        convert_units(1.0, "energy", "sideways", us)
    with pytest.raises(DomainError):
        UnitSystem(length_si=0.0)
    with pytest.raises(DomainError):
        UnitSystem(mass_si=-1.0)


def test_scales_are_consistent():
    us = UnitSystem(mass_si=2 * ELECTRON_MASS_SI, length_si=5e-9)
    assert us.energy * us.time == pytest.approx(HBAR_SI, rel=1e-14)
    assert us.field * us.charge_si == pytest.approx(us.force, rel=1e-14)
    assert us.magnetic_field * us.charge_si * us.length_si ** 2 == pytest.approx(HBAR_SI, rel=1e-14)
    assert math.isclose(us.scale("length"), 5e-9)
