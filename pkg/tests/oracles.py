"""Independent reference computations shared by several test modules."""
import cmath
import math

import numpy as np
from scipy import integrate, optimize

from ballistic_green.atomlaser import GaussianSource
from ballistic_green.propagator import FieldConfig
from ballistic_green.qhe import level_density, level_energy
from ballistic_green.units import ATOMIC_MASS_UNIT_SI, UnitSystem, convert_units

CROSSED_UNITS = UnitSystem(length_si=1e-8)


def direct_shutter(x, k, t):
    """``int_{-inf}^0 dx' K_free(x, t | x', 0) exp(i k x')`` by contour rotation.

    With ``x' = -u`` and ``u = v exp(i pi/4)`` the Gaussian phase becomes a
    real decaying Gaussian; the rotation is allowed because the integrand
    decays in the sector between the two rays.
    """
    rot = cmath.exp(1j * math.pi / 4)
    pref = cmath.sqrt(1 / (2j * math.pi * t))

    def f(v):
        u = v * rot
        return rot * pref * cmath.exp(1j * (x + u) ** 2 / (2 * t) - 1j * k * u)

    upper = 12 * math.sqrt(t) + 2 * abs(x) + 2 * k * t
    re = integrate.quad(lambda v: f(v).real, 0, upper, limit=400, epsabs=1e-12, epsrel=1e-10)[0]
    im = integrate.quad(lambda v: f(v).imag, 0, upper, limit=400, epsabs=1e-12, epsrel=1e-10)[0]
    return complex(re, im)


def crossed(b_t, e_vm, us=CROSSED_UNITS):
    """Electron in ``b_t`` tesla and ``e_vm`` volt per metre, natural units."""
    return FieldConfig(force_f=convert_units(e_vm, "field", "si_to_natural", us),
                       larmor=convert_units(b_t, "magnetic_field", "si_to_natural", us) / 2)


def level_integral(k, cfg):
    """Weight of Landau level ``k`` by adaptive quadrature over +-40 widths."""
    c = float(level_energy(k, cfg))
    w = 40 * cfg.gamma
    val, _ = integrate.quad(lambda x: level_density(k, x, cfg), c - w, c + w, points=[c],
                            limit=400, epsabs=0, epsrel=1e-12)
    return val


def rb_setup():
    """Rubidium-87 condensate of width 0.8 um under gravity, length unit 1 um."""
    m = 87 * ATOMIC_MASS_UNIT_SI
    us = UnitSystem(mass_si=m, length_si=1e-6)
    force = convert_units(m * 9.81, "force", "si_to_natural", us)
    return FieldConfig(force_f=force, larmor=0.0), GaussianSource(width_a=0.8, rabi=1.0), us


def gap_center_field(nu, e_f, force):
    """Field ``B`` at which ``e_f`` sits midway between levels ``nu - 1`` and ``nu``."""
    def f(w):
        cfg = FieldConfig(force_f=force, larmor=w)
        return 2 * nu * w + cfg.level_shift - e_f
    w = optimize.brentq(f, 0.25 * e_f / nu, e_f / nu, xtol=1e-15)
    return 2 * w


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (m + m.conj().T), rng.normal(size=n) + 1j * rng.normal(size=n)
