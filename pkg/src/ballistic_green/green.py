"""Energy Green functions and a damped-Laplace numerical oracle.

Convention: in ``G(r, r'; E)`` the source sits at the second argument
``r'`` and ``r`` is the observation point. ``G`` is the retarded resolvent
``(E + i0 - H)^{-1}`` so that ``-Im G(r, r; E) / pi`` is the local density of
states.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _quad
from .errors import AccuracyError, DomainError
from .specialfns import airy, airy_ai

__all__ = [
    "GreenSample", "green_free", "green_free_imag", "green_linear_field", "green_linear_field_imag",
    "im_green_linear_field_coincidence", "green_numeric_laplace",
    "green_numeric_laplace_extrapolated", "linear_field_alphas", "dipped_contour",
]


@dataclass(frozen=True)
class GreenSample:
    """A single evaluated Green-function value with its arguments."""

    value: complex
    r: tuple
    rp: tuple
    energy: float


def _distance(r, rp):
    return np.sqrt(np.sum((np.asarray(r, dtype=float) - np.asarray(rp, dtype=float)) ** 2, axis=-1))


def green_free(r, rp, energy, mass=1.0, hbar=1.0):
    """Free 3D Green function ``-(m / 2 pi hbar^2) exp(i k d) / d``.

    For ``E > 0`` the wave is outgoing (``k > 0``); for ``E < 0``,
    ``k = i kappa`` and the function decays.

    Raises
    ------
    DomainError
        At coincident points, where the function diverges.
    """
    d = _distance(r, rp)
    if np.any(d == 0):
        raise DomainError("green_free diverges at coincident points")
    k = np.sqrt(complex(2.0 * mass * energy)) / hbar
    if k.imag < 0:
        k = -k
    res = -mass / (2.0 * math.pi * hbar ** 2) * np.exp(1j * k * d) / d
    return complex(res) if np.ndim(res) == 0 else res


def green_free_imag(r, rp, energy, mass=1.0, hbar=1.0):
    """``Im G_free = -(m / 2 pi hbar^2) sin(k d) / d``, finite at ``d = 0``.

    Zero for ``E <= 0``; equals ``-m k / (2 pi hbar^2)`` at coincidence.
    """
    d = _distance(r, rp)
    if energy <= 0:
        return np.zeros_like(d) if np.ndim(d) else 0.0
    k = math.sqrt(2.0 * mass * energy) / hbar
    res = -mass / (2.0 * math.pi * hbar ** 2) * k * np.sinc(k * d / math.pi)
    return float(res) if np.ndim(res) == 0 else res


def linear_field_alphas(r, energy, cfg, rp=None):
    """Airy arguments ``alpha_pm = -beta [2E + F (z +- |r|)]``.

    Coordinates are relative to the source ``rp`` (origin by default). A
    source at height ``z'`` sees the local energy ``E + F z'``.
    """
    r = np.asarray(r, dtype=float)
    e_loc = energy
    if rp is not None:
        rp = np.asarray(rp, dtype=float)
        e_loc = energy + cfg.force_f * rp[..., 2]
        r = r - rp
    rho = np.sqrt(np.sum(r ** 2, axis=-1))
    z = r[..., 2]
    b = cfg.beta
    ap = -b * (2.0 * e_loc + cfg.force_f * (z + rho))
    am = -b * (2.0 * e_loc + cfg.force_f * (z - rho))
    return ap, am, rho


def green_linear_field(r, energy, cfg, rp=None):
    """Green function of a particle in the uniform force ``F`` along +z.

    ``G = (m / 2 hbar^2 |r|) [Ci(a+) Ai'(a-) - Ci'(a+) Ai(a-)]`` with
    ``Ci = Bi + i Ai`` and ``a+-`` from :func:`linear_field_alphas`.

    Parameters
    ----------
    r : array_like, shape (..., 3)
        Observation point(s).
    energy : float
    cfg : FieldConfig
        Uses ``force_f`` (> 0), ``mass`` and ``hbar``; ``larmor`` is ignored.
    rp : array_like, shape (3,), optional
        Source position; the origin by default.
    """
    if cfg.force_f <= 0:
        raise DomainError("green_linear_field needs force_f > 0; use green_free")
    ap, am, rho = linear_field_alphas(r, energy, cfg, rp)
    if np.any(rho == 0):
        raise DomainError("green_linear_field diverges at the source point")
    p = airy(ap)
    ai_m, aip_m = airy_ai(am)
    res = cfg.mass / (2.0 * cfg.hbar ** 2 * rho) * (p.ci * aip_m - p.cip * ai_m)
    return complex(res) if np.ndim(res) == 0 else res


def green_linear_field_imag(r, energy, cfg, rp=None):
    """Imaginary part of :func:`green_linear_field`, using Ai only.

    Finite at coincidence, where it tends to
    :func:`im_green_linear_field_coincidence`.
    """
    if cfg.force_f <= 0:
        raise DomainError("green_linear_field_imag needs force_f > 0")
    ap, am, rho = linear_field_alphas(r, energy, cfg, rp)
    a_p, ap_p = airy_ai(ap)
    a_m, ap_m = airy_ai(am)
    num = a_p * ap_m - ap_p * a_m
    pref = cfg.mass / (2.0 * cfg.hbar ** 2)
    b = cfg.beta
    # small-separation limit of num / rho, used where rho vanishes
    a0 = 0.5 * (ap + am)
    ai0, aip0 = airy_ai(a0)
    limit = 2.0 * b * cfg.force_f * (a0 * ai0 ** 2 - aip0 ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rho * b * cfg.force_f > 1e-6, num / np.where(rho > 0, rho, 1.0), limit)
    res = pref * ratio
    return float(res) if np.ndim(res) == 0 else res


def im_green_linear_field_coincidence(energy, cfg):
    """``Im G(r', r'; E)`` for a source at the origin in a uniform force.

    ``-(m beta F / hbar^2) [Ai'(-2 beta E)^2 + 2 beta E Ai(-2 beta E)^2]``.
    """
    b = cfg.beta
    x = -2.0 * b * np.asarray(energy, dtype=float)
    ai, aip = airy_ai(x)
    res = -(cfg.mass * b * cfg.force_f / cfg.hbar ** 2) * (aip ** 2 - x * ai ** 2)
    return float(res) if np.ndim(res) == 0 else res


def dipped_contour(depth, scale=None):
    """Contour ``t(s) = s - i depth (1 - exp(-s/scale))`` and its derivative.

    Leaves the origin at angle ``-atan(depth/scale)`` (45 degrees by
    default) and runs parallel to the real axis at ``Im t = -depth``.
    Passing below the real axis is the retarded prescription, so poles of
    the propagator on the real time axis are never crossed.
    """
    scale = depth if scale is None else scale

    def t_of(s):
        return s - 1j * depth * (-np.expm1(-s / scale))

    def dt_of(s):
        return 1.0 - 1j * (depth / scale) * np.exp(-s / scale)

    return t_of, dt_of


def green_numeric_laplace(prop, r, rp, energy, eta, t_max, hbar=1.0, *,
                          contour_depth=None, epsrel=1e-9, epsabs=1e-13,
                          breakpoints=()):
    """Damped Laplace transform of a propagator into an energy Green function.

    ``(1/i hbar) int_0^{t_max} dt exp(i (E + i eta) t / hbar) K(r, t | r', 0)``

    Parameters
    ----------
    prop : callable
        ``prop(r, rp, t)`` returning ``K`` for an array of times ``t``; must
        accept complex ``t`` when ``contour_depth`` is given.
    eta : float
        Damping, > 0. The result carries an O(eta) bias; combine two values
        with :func:`green_numeric_laplace_extrapolated`.
    t_max : float
        Upper limit; ``t_max * eta / hbar`` should be at least 30.
    contour_depth : float, optional
        If given, integrate along :func:`dipped_contour` instead of the real
        axis (equal by Cauchy's theorem for retarded propagators, and far
        better behaved near t = 0 and near real-axis poles).

    Returns
    -------
    complex

    Raises
    ------
    AccuracyError
        Quadrature failed; ``estimate`` holds the best value reached.
    """
    if eta <= 0:
        raise DomainError("eta must be positive")
    if t_max * eta / hbar < 30:
        raise DomainError("t_max * eta / hbar must be >= 30 to suppress the tail")
    z = energy + 1j * eta
    if contour_depth is None:
        # t = u^2 tames the t^{-d/2} behaviour at the origin
        def integrand(u):
            t = u * u
            return 2.0 * u * np.exp(1j * z * t / hbar) * prop(r, rp, t)
        a, b = 0.0, math.sqrt(t_max)
        bps = [math.sqrt(p) for p in breakpoints]
    else:
        t_of, dt_of = dipped_contour(contour_depth)

        def integrand(s):
            t = t_of(s)
            return dt_of(s) * np.exp(1j * z * t / hbar) * prop(r, rp, t)
        a, b = 0.0, t_max
        bps = list(breakpoints)
    # start with panels about one oscillation period long near the origin
    n0 = int(min(4000, max(16, abs(energy) * (b - a) / (2 * math.pi * hbar)
                           if contour_depth is not None else 16)))
    try:
        val, _ = _quad.gk_quad(integrand, a, b, epsabs=epsabs, epsrel=epsrel,
                               initial=n0, breakpoints=bps)
    except AccuracyError as exc:
        raise AccuracyError(str(exc), estimate=exc.estimate / (1j * hbar), error=exc.error) from None
    return complex(val / (1j * hbar))


def green_numeric_laplace_extrapolated(prop, r, rp, energy, eta, t_factor=30.0, hbar=1.0, **kw):
    """Richardson extrapolation ``2 G(eta/2) - G(eta)`` of the Laplace oracle.

    Each evaluation uses ``t_max = t_factor * hbar / eta_i``.
    """
    g1 = green_numeric_laplace(prop, r, rp, energy, eta, t_factor * hbar / eta, hbar, **kw)
    g2 = green_numeric_laplace(prop, r, rp, energy, 0.5 * eta, 2 * t_factor * hbar / eta, hbar, **kw)
    return 2.0 * g2 - g1
