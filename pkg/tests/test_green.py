import math

import numpy as np
import pytest

from ballistic_green.errors import DomainError
from ballistic_green.green import (green_free, green_free_imag, green_linear_field, green_linear_field_imag,
                                   green_numeric_laplace, green_numeric_laplace_extrapolated,
                                   im_green_linear_field_coincidence, linear_field_alphas)
from ballistic_green.propagator import FieldConfig, free_propagator, linear_field_propagator
from ballistic_green.source import field_wigner_current


def free3(r, rp, t):
    return free_propagator(r, rp, t, dim=3)


def test_green_free_modulus_outgoing():
    for d in (0.3, 1.0, 4.5):
        g = green_free([0, 0, d], [0, 0, 0], 0.8, mass=1.4, hbar=0.9)
        assert abs(g) == pytest.approx(1.4 / (2 * math.pi * 0.81 * d), rel=1e-14)


def test_green_free_zero_and_negative_energy():
    g0 = green_free([1.0, 0, 0], [0, 0, 0], 0.0)
    assert g0 == -1 / (2 * math.pi)
    gn = green_free([0, 2.0, 0], [0, 0, 0], -0.5)
    assert gn.imag == 0
    assert gn.real == pytest.approx(-math.exp(-2.0) / (4 * math.pi), rel=1e-14)
    with pytest.raises(DomainError):
        green_free([1, 1, 1], [1, 1, 1], 0.5)


def test_green_free_imaginary_part_formula():
    r = np.random.default_rng(1).normal(size=(50, 3))
    e = 0.6
    k = math.sqrt(1.2)
    d = np.linalg.norm(r, axis=1)
    g = green_free(r, np.zeros(3), e)
    assert np.allclose(g.imag, -np.sin(k * d) / (2 * math.pi * d), rtol=1e-13, atol=1e-16)
    assert np.allclose(green_free_imag(r, np.zeros(3), e), g.imag, rtol=1e-12, atol=1e-16)
    assert green_free_imag([0, 0, 0], [0, 0, 0], e) == pytest.approx(-k / (2 * math.pi))


@pytest.mark.parametrize("d", [1.0, 2.0, 3.5, 5.0])
def test_free_green_laplace_oracle(d):
    g = green_numeric_laplace_extrapolated(free3, [0, 0, d], [0, 0, 0], 0.5, 0.004, contour_depth=1.0)
    ref = green_free([0, 0, d], [0, 0, 0], 0.5)
    assert abs(g - ref) <= 1e-3 * abs(ref)


def test_laplace_bias_linear_in_eta():
    ref = green_free([0, 0, 2.0], [0, 0, 0], 0.5)
    errs = []
    for eta in (0.04, 0.02, 0.01):
        g = green_numeric_laplace(free3, [0, 0, 2.0], [0, 0, 0], 0.5, eta, 30 / eta, contour_depth=1.0)
        errs.append(abs(g - ref))
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.1)


def test_laplace_negative_energy_real_decay():
    g = green_numeric_laplace_extrapolated(free3, [0, 0, 1.5], [0, 0, 0], -0.5, 0.004, contour_depth=1.0)
    assert abs(g.imag) < 1e-4 * abs(g.real)
    assert g.real == pytest.approx(-math.exp(-1.5) / (2 * math.pi * 1.5), rel=1e-3)


def test_laplace_argument_checks():
    with pytest.raises(DomainError):
        green_numeric_laplace(free3, [0, 0, 1], [0, 0, 0], 0.5, 0.0, 10.0)
    with pytest.raises(DomainError):
        green_numeric_laplace(free3, [0, 0, 1], [0, 0, 0], 0.5, 0.01, 10.0)


@pytest.mark.parametrize("r", [[0, 0, 2.0], [1.0, 0, -1.5], [0.5, 1.0, 3.0]])
@pytest.mark.parametrize("e", [0.6, -0.3])
def test_linear_field_laplace_oracle(r, e):
    cfg = FieldConfig(force_f=0.7, larmor=0.0)

    def prop(a, b, t):
        return linear_field_propagator(a, b, t, 0.7)

    g = green_numeric_laplace_extrapolated(prop, r, [0, 0, 0], e, 0.004, contour_depth=1.0)
    ref = green_linear_field(r, e, cfg)
    assert abs(g - ref) <= 1e-3 * abs(ref)


def test_linear_field_small_force_limit():
    r = np.array([0.4, -0.3, 1.2])
    ref = green_free(r, np.zeros(3), 0.9)
    errs = [abs(green_linear_field(r, 0.9, FieldConfig(force_f=f, larmor=0.0)) - ref) / abs(ref)
            for f in (1e-2, 1e-3, 1e-4)]
    assert errs[2] < 1e-3 and errs[2] < errs[1] < errs[0]


def test_linear_field_schrodinger_residual():
    cfg = FieldConfig(force_f=0.5, larmor=0.0)
    e = 0.4
    h = 1e-3
    for r0 in ([0.7, 0.2, 1.1], [-1.0, 0.5, -0.8], [0.3, -1.2, 2.5]):
        r0 = np.array(r0)
        lap = -6 * green_linear_field(r0, e, cfg)
        for i in range(3):
            step = np.zeros(3)
            step[i] = h
            lap += green_linear_field(r0 + step, e, cfg) + green_linear_field(r0 - step, e, cfg)
        lap /= h * h
        g = green_linear_field(r0, e, cfg)
        # H = -lap/2 - F z for a force along +z
        resid = (e + cfg.force_f * r0[2]) * g + 0.5 * lap
        assert abs(resid) <= 1e-4 * abs(g)


def test_linear_field_alphas_definition():
    rng = np.random.default_rng(7)
    cfg = FieldConfig(force_f=0.9, larmor=0.0, mass=1.7, hbar=0.6)
    r = rng.normal(size=(100, 3)) * 3
    e = rng.normal(size=100)
    ap, am, rho = linear_field_alphas(r, e, cfg)
    n = np.linalg.norm(r, axis=1)
    assert np.allclose(rho, n)
    assert np.allclose(ap, -cfg.beta * (2 * e + 0.9 * (r[:, 2] + n)), rtol=1e-14)
    assert np.allclose(am, -cfg.beta * (2 * e + 0.9 * (r[:, 2] - n)), rtol=1e-14)


def test_linear_field_source_offset_is_energy_shift():
    cfg = FieldConfig(force_f=0.8, larmor=0.0)
    rp = np.array([0.0, 0.0, -1.3])
    r = np.array([0.5, 0.2, 1.0])
    a = green_linear_field(r, 0.2, cfg, rp=rp)
    b = green_linear_field(r - rp, 0.2 + 0.8 * rp[2], cfg)
    assert a == pytest.approx(b, rel=1e-14)


def test_linear_field_imag_and_coincidence():
    cfg = FieldConfig(force_f=0.7, larmor=0.0)
    for r in ([0, 0, 2.0], [1.0, 0.3, -1.5]):
        assert green_linear_field_imag(r, 0.6, cfg) == pytest.approx(green_linear_field(r, 0.6, cfg).imag, rel=1e-10)
    lim = im_green_linear_field_coincidence(0.6, cfg)
    assert green_linear_field_imag([0, 0, 1e-9], 0.6, cfg) == pytest.approx(lim, rel=1e-8)
    # laterally the approach is quadratic; along z the local energy shifts linearly
    assert green_linear_field([1e-4, 0, 0], 0.6, cfg).imag == pytest.approx(lim, rel=1e-6)


def test_coincidence_matches_field_wigner_shape():
    cfg = FieldConfig(force_f=0.7, larmor=0.0)
    e = np.linspace(-1.0, 2.0, 31)
    ratio = im_green_linear_field_coincidence(e, cfg) / field_wigner_current(e, cfg.beta)
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    assert ratio[0] < 0


def test_linear_field_requires_force():
    with pytest.raises(DomainError):
        green_linear_field([0, 0, 1], 0.5, FieldConfig(force_f=0.0, larmor=0.0))
    with pytest.raises(DomainError):
        green_linear_field([0, 0, 0], 0.5, FieldConfig(force_f=1.0, larmor=0.0))
