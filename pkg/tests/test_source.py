import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ballistic_green.atomlaser import GaussianSource, total_current_exact, total_current_geometric
from ballistic_green.errors import ContractError, DomainError
from ballistic_green.green import green_free_imag, green_linear_field_imag, im_green_linear_field_coincidence
from ballistic_green.propagator import FieldConfig
from ballistic_green.source import (RadialProfile, SourceSpec, discrete_eigen_current, discrete_resolvent_current,
                                    field_wigner_current, total_current_bilinear, total_current_point,
                                    wigner_current)
from ballistic_green.specialfns import airy

from oracles import random_hermitian


def free_imag(r, rp, e):
    return green_free_imag(r, rp, e)


def gaussian_free_current(e, a, strength=1.0):
    """Momentum-space closed form of J for a Gaussian source in free space."""
    k = math.sqrt(2 * e)
    ft2 = a ** 3 * (2 * math.sqrt(math.pi)) ** 3 * math.exp(-k * k * a * a)
    return abs(strength) ** 2 * 2 * math.pi * 4 * math.pi * k * ft2 / (2 * math.pi) ** 3


def test_point_current_definition():
    assert total_current_point(1.5, 0.0) == 0.0
    assert total_current_point(2 * 1.5, -0.3) == pytest.approx(4 * total_current_point(1.5, -0.3))
    with pytest.raises(ContractError):
        total_current_point(1.0, 0.1)


def test_point_current_is_ldos():
    cfg = FieldConfig(force_f=0.7, larmor=0.0)
    im = im_green_linear_field_coincidence(0.4, cfg)
    c = 0.8 - 0.3j
    ldos = -im / math.pi
    assert total_current_point(c, im) == pytest.approx(2 * math.pi * abs(c) ** 2 * ldos, rel=1e-14)


def test_bilinear_point_reduces():
    src = SourceSpec(kind="point", strength=2.0)
    e = 0.5
    assert total_current_bilinear(src, free_imag, e) == pytest.approx(4 * 2 * math.sqrt(1.0) / (2 * math.pi), rel=1e-12)


@pytest.mark.parametrize("e,a", [(0.7, 1.0), (0.2, 1.5), (1.5, 0.6)])
def test_bilinear_gaussian_free_closed_form(e, a):
    src = SourceSpec(kind="gaussian", width_a=a, strength=1.0)
    j = total_current_bilinear(src, free_imag, e, n_nodes=12)
    assert j == pytest.approx(gaussian_free_current(e, a), rel=1e-6)


def test_bilinear_gaussian_field_matches_exact_atom_laser_current():
    cfg = FieldConfig(force_f=1.0, larmor=0.0)
    src = SourceSpec(kind="gaussian", width_a=1.0, strength=1.0)

    def gim(r, rp, e):
        # Im G depends on r - rp and the local energy at the source height
        return green_linear_field_imag(r, e, cfg, rp=rp)

    j = total_current_bilinear(src, gim, 0.3, n_nodes=10)
    ref = total_current_exact(0.3, GaussianSource(width_a=1.0, rabi=1.0), cfg)
    assert j == pytest.approx(ref, rel=1e-4)


def test_exact_current_approaches_geometric_in_extended_regime():
    # hbar^2 / (m F a^3) = 1/64: the geometric slice picture should hold to a few percent
    cfg = FieldConfig(force_f=1.0, larmor=0.0)
    src = GaussianSource(width_a=4.0, rabi=1.0)
    for e in (-2.0, 0.0, 3.0):
        assert total_current_exact(e, src, cfg) == pytest.approx(total_current_geometric(e, src, cfg), rel=0.05)


@given(st.floats(0.4, 2.0), st.floats(0.05, 2.0), st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=25, deadline=None)
def test_bilinear_current_positive(a, e, re, im):
    src = SourceSpec(kind="gaussian", width_a=a, strength=complex(re, im) + 0.01, position=(0.3, -1.0, 2.0))
    assert total_current_bilinear(src, free_imag, e, n_nodes=6) >= 0


def test_discrete_dual_route():
    h, s = random_hermitian(50, 3)
    for e in (-3.0, 0.1, 4.2):
        for eta in (0.5, 0.01):
            a = discrete_resolvent_current(h, s, e, eta)
            b = discrete_eigen_current(h, s, e, eta)
            assert a == pytest.approx(b, rel=1e-10)


def test_discrete_single_lorentzian():
    h, _ = random_hermitian(8, 5)
    evals, evecs = np.linalg.eigh(h)
    s = 0.7 * evecs[:, 2]
    eta = 0.05
    for e in evals[2] + np.array([-0.1, 0.0, 0.2]):
        lor = (eta / math.pi) / ((e - evals[2]) ** 2 + eta ** 2)
        assert discrete_resolvent_current(h, s, e, eta) == pytest.approx(2 * math.pi * 0.49 * lor, rel=1e-10)


def test_discrete_sum_rule():
    h, s = random_hermitian(20, 11)
    eta = 1e-3
    edges = np.sort(np.linalg.eigvalsh(h))
    total, _ = integrate.quad(lambda e: discrete_eigen_current(h, s, e, eta), -1e4, 1e4,
                              points=list(edges), limit=2000, epsabs=0, epsrel=1e-10)
    assert total == pytest.approx(2 * math.pi * np.vdot(s, s).real, rel=1e-3)


def test_discrete_argument_checks():
    h, s = random_hermitian(4, 1)
    with pytest.raises(DomainError):
        discrete_resolvent_current(h, s, 0.0, 0.0)


PROFILES = {
    "gaussian": lambda r: np.exp(-r * r),
    "exponential": lambda r: np.exp(-r) * (1 + r),
    "shell": lambda r: r * r * np.exp(-2 * r * r),
}


@pytest.mark.parametrize("name", sorted(PROFILES))
def test_wigner_exponent(name):
    prof = RadialProfile.from_function(PROFILES[name], 40.0, 4001)
    e = np.geomspace(1e-6, 1e-4, 5)
    j = np.array([wigner_current(prof, x) for x in e])
    slope = np.polyfit(np.log(e), np.log(j), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.01)


def test_wigner_threshold_constant():
    prof = RadialProfile.from_function(PROFILES["exponential"], 40.0, 4001)
    moment = float(integrate.quad(lambda r: r * r * np.exp(-r) * (1 + r), 0, np.inf)[0])
    e = 1e-8
    k = math.sqrt(2 * e)
    assert wigner_current(prof, e) / k == pytest.approx(moment ** 2, rel=1e-5)


def test_wigner_gaussian_closed_form():
    prof = RadialProfile.from_function(PROFILES["gaussian"], 12.0, 4001)
    for e in (0.05, 0.5, 2.0):
        k = math.sqrt(2 * e)
        assert wigner_current(prof, e) == pytest.approx(k * math.pi / 16 * math.exp(-k * k / 2), rel=1e-8)


def test_wigner_rejects_bad_input():
    prof = RadialProfile.from_function(PROFILES["gaussian"], 12.0)
    with pytest.raises(DomainError):
        wigner_current(prof, 0.0)
    with pytest.raises(DomainError):
        RadialProfile.from_function(lambda r: 1 / (1 + r), 10.0)


def test_field_wigner_values():
    aip0 = airy(0.0).aip
    assert field_wigner_current(0.0, 0.8) == pytest.approx(aip0 ** 2, rel=1e-13)
    assert field_wigner_current(0.0, 0.8) == pytest.approx(0.066987, abs=1e-6)
    e = -np.linspace(0.01, 5, 50)
    assert np.all(field_wigner_current(e, 0.8) > 0)
    with pytest.raises(DomainError):
        field_wigner_current(0.1, 0.0)


def test_field_wigner_recovers_sqrt_law():
    beta = 0.5
    x = np.linspace(20, 100, 41)
    ratio = field_wigner_current(x / (2 * beta), beta) / np.sqrt(x)
    # Ai'(-x)^2 + x Ai(-x)^2 -> sqrt(x) / pi
    # the correction oscillates with an amplitude falling like x^{-3/2}
    assert np.allclose(ratio, 1 / math.pi, rtol=5e-3)
    assert np.abs(ratio[-10:] * math.pi - 1).max() < np.abs(ratio[:10] * math.pi - 1).max()
    slope = np.polyfit(np.log(x), np.log(field_wigner_current(x / (2 * beta), beta)), 1)[0]
    assert slope == pytest.approx(0.5, abs=1e-3)
