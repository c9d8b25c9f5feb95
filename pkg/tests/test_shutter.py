import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballistic_green.errors import DomainError
from ballistic_green.shutter import (ShutterState, classical_front, moshinsky_m, shutter_density, shutter_u,
                                     shutter_wavefunction)

from oracles import direct_shutter


@pytest.mark.parametrize("x", np.linspace(-5, 5, 11))
def test_moshinsky_matches_propagator_integral(x):
    assert abs(moshinsky_m(x, 1.0, 1.0) - direct_shutter(x, 1.0, 1.0)) < 1e-6


def test_moshinsky_at_front():
    k, tau = 1.7, 2.3
    m = moshinsky_m(k * tau, k, tau)
    assert abs(m) ** 2 == pytest.approx(0.25, abs=1e-14)


def test_moshinsky_limits():
    k, tau = 1.0, 1.0
    # deep shadow: |M|^2 falls off algebraically as tau / (2 pi (x - k tau)^2)
    for x in (30.0, 60.0, 200.0):
        assert abs(moshinsky_m(x, k, tau)) ** 2 == pytest.approx(tau / (2 * math.pi * (x - k * tau) ** 2), rel=0.01)
    far = np.abs(moshinsky_m(np.linspace(-80, -60, 201), k, tau)) ** 2
    assert abs(far.mean() - 1) < 0.01 and far.max() > 1
    with pytest.raises(DomainError):
        moshinsky_m(0.0, 1.0, 0.0)


def test_density_special_values():
    assert shutter_density(0.0) == 0.25
    assert shutter_density(-1e4) < 1e-8
    # the ringing about 1 has amplitude sqrt(2) / (pi u)
    for lo in (20.0, 80.0):
        u = np.linspace(lo, 2 * lo, 4000)
        dev = np.abs(shutter_density(u) - 1)
        assert dev.max() == pytest.approx(math.sqrt(2) / (math.pi * lo), rel=0.02)


def test_wavefunction_matches_fresnel_form():
    st_ = ShutterState(k=1.3, mass=0.7, hbar=1.1)
    x = np.linspace(-20, 30, 1000)
    for t in (0.5, 3.0, 12.0):
        psi = shutter_wavefunction(x, t, st_)
        assert np.max(np.abs(np.abs(psi) ** 2 - shutter_density(shutter_u(x, t, st_)))) < 1e-10


@given(st.floats(0.1, 5.0), st.floats(0.05, 50.0))
@settings(max_examples=20, deadline=None)
def test_front_quarter_density(k, t):
    st_ = ShutterState(k=k)
    assert abs(shutter_wavefunction(classical_front(t, st_), t, st_)) ** 2 == pytest.approx(0.25, abs=1e-12)


def test_front_separates_light_and_shadow():
    st_ = ShutterState(k=1.0)
    t = 10.0
    front = classical_front(t, st_)
    lit = np.abs(shutter_wavefunction(np.linspace(front - 60, front - 30, 300), t, st_)) ** 2
    dark = np.abs(shutter_wavefunction(np.linspace(front + 30, front + 60, 300), t, st_)) ** 2
    assert np.all(np.abs(lit - 1) < 0.1) and abs(lit.mean() - 1) < 0.02
    assert np.all(dark < 0.01)


def test_initial_condition_limit():
    st_ = ShutterState(k=1.0)
    x = np.array([0.5, 1.0, 3.0])
    d = [np.abs(shutter_wavefunction(x, t, st_)) ** 2 for t in (1e-2, 1e-4)]
    assert np.all(d[1] < d[0]) and np.all(d[1] < 1e-4)


def test_state_validation():
    with pytest.raises(DomainError):
        ShutterState(k=0.0)
    with pytest.raises(DomainError):
        shutter_wavefunction(0.0, -1.0, ShutterState(k=1.0))
