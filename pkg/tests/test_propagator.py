import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballistic_green.errors import DomainError, SingularityError
from ballistic_green.propagator import (FieldConfig, classical_action, crossed_prefactor,
                                        crossed_return_propagator, free_propagator)


def test_field_config_derived_quantities():
    cfg = FieldConfig(force_f=0.3, larmor=0.7, mass=2.0, hbar=1.5)
    assert cfg.beta ** 3 == pytest.approx(2.0 / (2 * 1.5 * 0.3) ** 2, rel=1e-14)
    # l = sqrt(hbar / eB) with B = 2 m omega_L / e
    assert cfg.magnetic_length == pytest.approx(math.sqrt(1.5 / (2 * 2.0 * 0.7)), rel=1e-14)
    assert cfg.gamma == pytest.approx(0.3 * cfg.magnetic_length, rel=1e-14)
    assert cfg.drift_v == pytest.approx(0.3 / (2 * 2.0 * 0.7), rel=1e-14)


def test_field_config_validation():
    with pytest.raises(DomainError):
        FieldConfig(force_f=-1.0, larmor=1.0)
    with pytest.raises(DomainError):
        FieldConfig(force_f=1.0, larmor=1.0, mass=0.0)
    with pytest.raises(DomainError):
        FieldConfig(force_f=0.0, larmor=1.0).beta
    with pytest.raises(DomainError):
        FieldConfig(force_f=1.0, larmor=0.5, drift_v=3.0)
    assert FieldConfig.from_drift(0.25, 2.0).force_f == pytest.approx(1.0)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_free_propagator_coincidence_modulus(dim):
    for t in (0.1, 1.0, 7.0):
        k = free_propagator(np.zeros(dim), np.zeros(dim), t, dim=dim, mass=1.3, hbar=0.8)
        assert abs(k) == pytest.approx((1.3 / (2 * math.pi * 0.8 * t)) ** (dim / 2), rel=1e-13)


def test_free_propagator_rejects_nonpositive_time():
    with pytest.raises(DomainError):
        free_propagator(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        free_propagator(0.0, 1.0, 1.0, dim=4)


def test_chapman_kolmogorov():
    # intermediate times given a small negative imaginary part keep the
    # grid integral absolutely convergent; the identity is analytic in t
    t1, t2 = 0.7 - 0.3j, 0.5 - 0.2j
    x = np.linspace(-40, 40, 40001)
    dx = x[1] - x[0]
    for x0, x1 in [(0.0, 0.6), (-1.0, 2.0)]:
        val = np.sum(free_propagator(x1, x, t2) * free_propagator(x, x0, t1)) * dx
        ref = free_propagator(x1, x0, t1 + t2)
        assert abs(val - ref) <= 1e-6 * abs(ref)


@pytest.mark.parametrize("f", [
    lambda x: np.exp(-x * x),
    lambda x: np.cos(x) / (1 + x * x),
    lambda x: np.exp(-(x - 0.5) ** 2 / 2) * (1 + x),
])
def test_delta_sequence(f):
    x = np.linspace(-60, 60, 600001)
    dx = x[1] - x[0]
    xp = 0.3
    errs = []
    for t in (1e-2, 1e-3):
        # damped kernel keeps the tails summable; Im t < 0 is the retarded side
        val = np.sum(free_propagator(x, xp, t * (1 - 0.5j)) * f(x)) * dx
        errs.append(abs(val - f(np.array(xp))))
    assert errs[1] < errs[0] and errs[1] < 5e-3


def test_crossed_quarter_period_without_field():
    cfg = FieldConfig(force_f=0.0, larmor=0.9)
    t = math.pi / (2 * 0.9)
    assert crossed_return_propagator(t, cfg) == pytest.approx(-1j * 0.9 / (2 * math.pi), rel=1e-14)


def test_crossed_canonical_form():
    cfg = FieldConfig(force_f=0.4, larmor=0.6)
    t = np.array([0.3, 1.7, 4.1, 6.0])
    k = crossed_return_propagator(t, cfg)
    a = crossed_prefactor(t, cfg)
    assert np.allclose(k, a * np.exp(1j * classical_action(t, cfg)), rtol=1e-13)


def test_crossed_singular_times():
    cfg = FieldConfig(force_f=0.4, larmor=0.6)
    with pytest.raises(SingularityError):
        crossed_return_propagator(math.pi / 0.6, cfg)
    with pytest.raises(SingularityError):
        classical_action(2 * math.pi / 0.6 * (1 + 1e-14), cfg)


@given(st.floats(0.05, 3.0).filter(lambda t: abs(math.sin(0.8 * t)) > 1e-3))
@settings(max_examples=50, deadline=None)
def test_prefactor_independent_of_drift(t):
    vals = []
    for vd in (0.0, 0.5, 2.0):
        cfg = FieldConfig.from_drift(vd, 0.8)
        vals.append(crossed_return_propagator(t, cfg) * np.exp(-1j * classical_action(t, cfg)))
    assert abs(vals[1] - vals[0]) <= 1e-12 * abs(vals[0])
    assert abs(vals[2] - vals[0]) <= 1e-12 * abs(vals[0])


def test_classical_action_special_cases():
    cfg0 = FieldConfig(force_f=0.0, larmor=1.1)
    assert np.all(classical_action(np.array([0.2, 1.0, 2.5]), cfg0) == 0)
    cfg = FieldConfig.from_drift(0.7, 1.1)
    t = math.pi / (2 * 1.1)
    assert classical_action(t, cfg) == pytest.approx(-0.5 * 0.7 ** 2 * t, rel=1e-12)


def test_action_time_derivative_matches_energy():
    from ballistic_green.closedorbit import energy_of_time
    cfg = FieldConfig.from_drift(0.7, 1.1)
    h = 1e-5
    for t in (0.4, 2.2, 3.9, 7.5):
        fd = -(classical_action(t + h, cfg) - classical_action(t - h, cfg)) / (2 * h)
        assert fd == pytest.approx(energy_of_time(t, cfg), rel=1e-8)
