import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from ballistic_green.atomlaser import (GaussianSource, OutsideSourceWarning, beam_superposition, beam_wavefunction,
                                       beam_wavefunction_numeric, count_fringes, extended_source_regime,
                                       total_current_geometric, transverse_fringes, virtual_source_shift)
from ballistic_green.errors import DomainError
from ballistic_green.green import green_linear_field
from ballistic_green.propagator import FieldConfig
from ballistic_green.units import convert_units

from oracles import rb_setup

CFG = FieldConfig(force_f=1.0, larmor=0.0)


def test_ground_state_normalization():
    src = GaussianSource(width_a=1.7, rabi=1.0)
    val, _ = integrate.quad(lambda r: 4 * math.pi * r * r * (src.norm_n0 * math.exp(-r * r / (2 * 1.7 ** 2))) ** 2,
                            0, 40, epsabs=0, epsrel=1e-12)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_source_validation():
    with pytest.raises(DomainError):
        GaussianSource(width_a=0.0, rabi=1.0)
    with pytest.raises(DomainError):
        GaussianSource(width_a=1.0, rabi=-1.0)
    with pytest.raises(DomainError):
        virtual_source_shift(GaussianSource(1.0, 1.0), FieldConfig(force_f=0.0, larmor=0.0))


def test_shift_power_laws():
    a = np.array([0.3, 0.6, 1.2, 2.4])
    shifts = np.array([virtual_source_shift(GaussianSource(x, 1.0), CFG)[2] for x in a])
    assert np.all(shifts < 0)
    assert shifts[1] / shifts[0] == pytest.approx(16.0, rel=1e-14)
    assert np.polyfit(np.log(a), np.log(-shifts), 1)[0] == pytest.approx(4.0, abs=1e-12)
    n0m2 = np.array([GaussianSource(x, 1.0).norm_n0 ** -2 for x in a])
    assert np.polyfit(np.log(a), np.log(n0m2), 1)[0] == pytest.approx(3.0, abs=1e-12)
    assert abs(virtual_source_shift(GaussianSource(1e-4, 1.0), CFG)[2]) < 1e-15


def test_rb_shift_regression():
    cfg, src, us = rb_setup()
    shift = virtual_source_shift(src, cfg)
    assert shift[2] == pytest.approx(-3.770364505, rel=1e-9)
    assert convert_units(shift[2], "length", "natural_to_si", us) == pytest.approx(-3.770364505e-6, rel=1e-9)


@pytest.mark.parametrize("r,e", [
    ((0.0, 0.0, 5.0), 1.0),
    ((3.0, 1.0, 4.0), 0.5),
    ((0.0, 4.0, 0.0), 2.0),
    ((2.0, -2.0, 10.0), -0.5),
])
def test_virtual_source_matches_time_domain_oracle(r, e):
    src = GaussianSource(width_a=1.0, rabi=1.0)
    v = beam_wavefunction(np.array(r), e, src, CFG)
    n = beam_wavefunction_numeric(np.array(r), e, src, CFG)
    assert abs(v - n) <= 1e-3 * abs(n)


def test_numeric_oracle_point_source_limit():
    a = 0.15
    src = GaussianSource(width_a=a, rabi=1.0)
    pts = [np.array([0.3, 0.0, 1.5]), np.array([-1.0, 0.5, 2.5])]
    ratios = [beam_wavefunction_numeric(r, 0.7, src, CFG, epsrel=1e-8) / green_linear_field(r, 0.7, CFG)
              for r in pts]
    assert ratios[1] == pytest.approx(ratios[0], rel=1e-3)
    # integrated source strength (2 sqrt(pi) a)^{3/2} times the energy factor exp(-a^2 E)
    assert ratios[0] == pytest.approx((2 * math.sqrt(math.pi) * a) ** 1.5 * math.exp(-a * a * 0.7), rel=1e-3)


def test_numeric_oracle_linear_in_rabi():
    r = np.array([0.5, 0.0, 3.0])
    one = beam_wavefunction_numeric(r, 0.4, GaussianSource(1.0, 1.0), CFG)
    two = beam_wavefunction_numeric(r, 0.4, GaussianSource(1.0, 2.0), CFG)
    assert two == pytest.approx(2 * one, rel=1e-12)


def test_warning_inside_source():
    src = GaussianSource(width_a=1.0, rabi=1.0)
    with pytest.warns(OutsideSourceWarning):
        beam_wavefunction(np.array([0.0, 0.0, 2.0]), 0.5, src, CFG)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        beam_wavefunction(np.array([0.0, 0.0, 4.0]), 0.5, src, CFG)


def test_geometric_current_sum_rule_peak_and_width():
    src = GaussianSource(width_a=1.3, rabi=0.7)
    cfg = FieldConfig(force_f=0.9, larmor=0.0)
    total, _ = integrate.quad(lambda e: total_current_geometric(e, src, cfg), -np.inf, np.inf, epsrel=1e-12)
    assert total == pytest.approx(2 * math.pi * 0.7 ** 2, rel=1e-6)
    e = np.linspace(-3, 3, 6001)
    j = total_current_geometric(e, src, cfg)
    assert e[np.argmax(j)] == 0.0
    half = e[j >= j.max() / 2]
    fwhm = half[-1] - half[0]
    assert fwhm == pytest.approx(2 * math.sqrt(math.log(2)) * 0.9 * 1.3, abs=2e-3)


def test_extended_regime_flag():
    src = GaussianSource(width_a=2.0, rabi=1.0)
    assert extended_source_regime(7.9, src, CFG) and not extended_source_regime(8.1, src, CFG)


def test_superposition_constructive_doubling():
    src = GaussianSource(width_a=1.0, rabi=1.0)
    r = np.array([1.0, 0.0, 6.0])
    assert beam_superposition(r, 0.8, 0.8, src, CFG) == pytest.approx(4 * abs(beam_wavefunction(r, 0.8, src, CFG)) ** 2)


def test_fringe_count_grows_with_detuning():
    cfg, src, us = rb_setup()
    z = np.linspace(10, 400, 40001)
    counts = []
    for hz in (500.0, 1000.0, 2000.0):
        d = convert_units(6.62607015e-34 * hz, "energy", "si_to_natural", us)
        counts.append(count_fringes(z, (0.0, 0.0), d, -d, src, cfg))
    assert counts[0] < counts[1] < counts[2]
    assert counts[1] / counts[0] == pytest.approx(2.0, rel=0.15)
    assert counts[2] / counts[0] == pytest.approx(4.0, rel=0.15)


def test_transverse_fringes_vs_source_size():
    # at fixed energy a larger condensate pushes the virtual source further
    # upstream and lowers the energy it radiates at: fewer rings, and in the
    # extended-source regime a smooth (Gaussian-like) profile
    e, z = 8.0, 400.0
    widths = [0.3, 0.8, 1.2, 1.6, 2.2]
    res = [transverse_fringes(z, e, GaussianSource(a, 1.0), CFG) for a in widths]
    counts = [c for c, _ in res]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    assert counts[0] > counts[-1]
    src = GaussianSource(2.2, 1.0)
    assert extended_source_regime(e, src, CFG)
    assert res[-1][1] < 0.05
