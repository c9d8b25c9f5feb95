"""Atom laser: a Gaussian condensate coupled out into a uniform gravity field.

The source is ``sigma(r) = hbar Omega N0 exp(-|r - c|^2 / 2a^2)`` with
``N0 = a^{-3/2} pi^{-3/4}`` and the force ``F`` points along +z. Outside
the condensate its wave is exactly that of a point source displaced
upstream by ``m F a^4 / (2 hbar^2)``:

    psi(r) = hbar Omega (2 sqrt(pi) a)^{3/2}
             exp(-m a^2 E / hbar^2 + m^2 F^2 a^6 / (3 hbar^4)) G(r, r_v; E).

Energies are measured from the resonance slice through the source center.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np

from . import _quad
from .errors import AccuracyError, DomainError
from .green import green_linear_field

__all__ = [
    "GaussianSource", "virtual_source_shift", "beam_wavefunction",
    "beam_wavefunction_numeric", "total_current_geometric", "total_current_exact",
    "extended_source_regime", "beam_superposition", "count_fringes",
    "transverse_profile", "transverse_fringes",
    "OutsideSourceWarning",
]


class OutsideSourceWarning(UserWarning):
    """Evaluation point inside the region where the virtual source is inexact."""


@dataclass(frozen=True)
class GaussianSource:
    """Isotropic Gaussian condensate with Rabi coupling ``hbar Omega``."""

    width_a: float
    rabi: float
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.width_a <= 0:
            raise DomainError("width_a must be positive")
        if self.rabi <= 0:
            raise DomainError("rabi must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def norm_n0(self):
        """``N0 = a^{-3/2} pi^{-3/4}``, normalizing ``psi_0`` to one."""
        return self.width_a ** -1.5 * math.pi ** -0.75


def virtual_source_shift(src, cfg):
    """Position of the virtual point source, ``c - (m F a^4 / 2 hbar^2) e_z``."""
    if cfg.force_f <= 0:
        raise DomainError("virtual_source_shift requires force_f > 0")
    dz = -cfg.mass * cfg.force_f * src.width_a ** 4 / (2.0 * cfg.hbar ** 2)
    c = np.asarray(src.center, dtype=float)
    return c + np.array([0.0, 0.0, dz])


def _virtual_prefactor(energy, src, cfg):
    a, m, hb, f = src.width_a, cfg.mass, cfg.hbar, cfg.force_f
    expo = -m * a * a * energy / hb ** 2 + m * m * f * f * a ** 6 / (3.0 * hb ** 4)
    return src.rabi * (2.0 * math.sqrt(math.pi) * a) ** 1.5 * math.exp(expo)


def beam_wavefunction(r, energy, src, cfg, warn=True):
    """Outcoupled wave from the virtual point source.

    Parameters
    ----------
    r : array_like, shape (..., 3)
    energy : float
        Energy relative to the resonance at the source center.
    warn : bool
        Emit :class:`OutsideSourceWarning` for points within ``3a`` of the
        center, where the exterior formula is only approximate.
    """
    r = np.asarray(r, dtype=float)
    dist = np.sqrt(np.sum((r - np.asarray(src.center)) ** 2, axis=-1))
    if warn and np.any(dist <= 3 * src.width_a):
        warnings.warn("beam_wavefunction evaluated within 3a of the source center",
                      OutsideSourceWarning, stacklevel=2)
    # E refers to the slice through the condensate center, so coordinates
    # are taken relative to it; the virtual source then sees E + F dz
    c = np.asarray(src.center, dtype=float)
    rv = virtual_source_shift(src, cfg)
    g = green_linear_field(r - c, energy, cfg, rp=rv - c)
    return _virtual_prefactor(energy, src, cfg) * g


def _volume_kernel(r, t, src, cfg):
    """``int d^3r' K_field(r, t | r', 0) exp(-|r' - c|^2 / 2a^2)`` in closed form."""
    a, m, hb, f = src.width_a, cfg.mass, cfg.hbar, cfg.force_f
    x = np.asarray(r, dtype=float) - np.asarray(src.center, dtype=float)
    r2 = float(np.sum(x * x))
    z = float(x[2])
    d = 1.0 + 1j * hb * t / (m * a * a)
    ph = (f * t * z - f * f * t ** 3 / (4.0 * m)) / (2.0 * hb * d) + f * t * z / (2.0 * hb) \
        - f * f * t ** 3 / (24.0 * m * hb)
    return d ** -1.5 * np.exp(-r2 / (2.0 * a * a * d) + 1j * ph)


def beam_wavefunction_numeric(r, energy, src, cfg, t_max=None, eta=0.0, epsrel=1e-11):
    """Time-domain oracle for the outcoupled wave.

    ``psi(r) = -i Omega N0 int_0^inf dt exp(i (E + i eta) t / hbar)
    int d^3r' K_field(r, t | r', 0) exp(-|r' - c|^2 / 2a^2)``

    The Gaussian volume integral over the uniform-force propagator is done
    analytically; the time integral by adaptive quadrature. Its integrand
    decays like ``exp(-F^2 a^2 t^2 / 8 hbar^2)`` so no damping is needed
    (``eta = 0`` by default). The default ``t_max`` adds a margin for the
    classical travel time from the source to ``r``.
    """
    if cfg.force_f <= 0:
        raise DomainError("beam_wavefunction_numeric requires force_f > 0")
    a, hb, f = src.width_a, cfg.hbar, cfg.force_f
    if t_max is None:
        # Gaussian decay of the overlap, plus twice a bound on the classical
        # travel time to r: falling from rest, or crossing at the source speed
        dist = float(np.linalg.norm(np.asarray(r, dtype=float) - np.asarray(src.center))) + 3 * a
        m = cfg.mass
        t_travel = math.sqrt(2 * m * dist / f) + dist * math.sqrt(m / (2 * max(energy, f * a)))
        t_max = math.sqrt(8.0 * 40.0) * hb / (f * a) + 2 * t_travel
    omega = src.rabi / hb
    z = energy + 1j * eta

    def integrand(t):
        return np.exp(1j * z * t / hb) * _volume_kernel(r, t, src, cfg)

    # a handful of oscillations per starting panel
    n0 = int(min(2000, max(32, 4 * (abs(energy) + f * (np.linalg.norm(r) + a)) * t_max / hb)))
    try:
        val, _ = _quad.gk_quad(integrand, 0.0, t_max, epsabs=1e-15, epsrel=epsrel, initial=n0)
    except AccuracyError as exc:
        raise AccuracyError(str(exc), estimate=-1j * omega * src.norm_n0 * exc.estimate,
                            error=exc.error) from None
    return complex(-1j * omega * src.norm_n0 * val)


def extended_source_regime(energy, src, cfg):
    """True when ``E < m F^2 a^4 / (2 hbar^2)``, where the geometric current applies."""
    return energy < cfg.mass * cfg.force_f ** 2 * src.width_a ** 4 / (2.0 * cfg.hbar ** 2)


def total_current_geometric(energy, src, cfg):
    """Geometric total current ``(2 pi / hbar) int |sigma|^2 delta(E + F z) d^3r``.

    Closed form ``(2 pi / hbar) (hbar Omega)^2 N0^2 (pi a^2 / F) exp(-E^2 / F^2 a^2)``.
    Outside :func:`extended_source_regime` the value is still returned but
    is only an approximation.
    """
    if cfg.force_f <= 0:
        raise DomainError("total_current_geometric requires force_f > 0")
    a, f = src.width_a, cfg.force_f
    e = np.asarray(energy, dtype=float)
    res = (2 * math.pi / cfg.hbar) * src.rabi ** 2 * src.norm_n0 ** 2 * (math.pi * a * a / f) \
        * np.exp(-e ** 2 / (f * a) ** 2)
    return float(res) if res.ndim == 0 else res


def total_current_exact(energy, src, cfg, epsrel=1e-11):
    """Exact total current of the Gaussian source in a uniform force.

    ``J(E) = (hbar Omega)^2 / hbar^2 int dt exp(i E t / hbar) C(t)`` with
    ``C(t) = (1 + i hbar t / 2 m a^2)^{-3/2} exp(-a^2 F^2 t^2 / 4 hbar^2 - i F^2 t^3 / 24 m hbar)``,
    the overlap of the source with its own time-evolved image. Reduces to
    :func:`total_current_geometric` when ``hbar^2 / (m F a^3)`` is small.
    """
    a, m, hb, f = src.width_a, cfg.mass, cfg.hbar, cfg.force_f
    t_max = math.sqrt(4.0 * 40.0) * hb / (f * a)

    def c(t):
        return (1 + 1j * hb * t / (2 * m * a * a)) ** -1.5 * np.exp(
            -(a * f * t / hb) ** 2 / 4.0 - 1j * f * f * t ** 3 / (24 * m * hb))

    def integrand(t):
        # C(-t) = conj C(t): the full-line integral is twice the real part
        return 2.0 * np.real(np.exp(1j * energy * t / hb) * c(t))

    n0 = int(min(2000, max(16, 2 * abs(energy) * t_max / hb)))
    val, _ = _quad.gk_quad(integrand, 0.0, t_max, epsabs=1e-15, epsrel=epsrel, initial=n0)
    return float(src.rabi ** 2 / hb ** 2 * val)


def beam_superposition(r, e1, e2, src, cfg, warn=True):
    """Density ``|psi_E1 + psi_E2|^2`` of a two-frequency outcoupler."""
    p1 = beam_wavefunction(r, e1, src, cfg, warn=warn)
    p2 = beam_wavefunction(r, e2, src, cfg, warn=warn) if e2 != e1 else p1
    return np.abs(p1 + p2) ** 2


def count_fringes(z, r_perp, e1, e2, src, cfg):
    """Number of longitudinal fringes of the two-frequency beam along ``z``.

    Counts zero crossings of the interference term ``2 Re(psi_1 psi_2*)``
    on the line ``(x, y) = r_perp`` and returns half their number (two
    crossings per fringe).
    """
    z = np.asarray(z, dtype=float)
    pts = np.column_stack([np.full_like(z, r_perp[0]), np.full_like(z, r_perp[1]), z])
    p1 = beam_wavefunction(pts, e1, src, cfg, warn=False)
    p2 = beam_wavefunction(pts, e2, src, cfg, warn=False)
    inter = np.real(p1 * np.conj(p2))
    s = np.sign(inter)
    s = s[s != 0]
    crossings = int(np.count_nonzero(s[1:] != s[:-1]))
    return 0.5 * crossings


def transverse_profile(x, z, energy, src, cfg):
    """Beam density ``|psi|^2`` along the line ``(x, 0, z)`` below the source."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(src.center, dtype=float)
    pts = np.column_stack([c[0] + x, np.full_like(x, c[1]), np.full_like(x, c[2] + z)])
    return np.abs(beam_wavefunction(pts, energy, src, cfg, warn=False)) ** 2


def _local_minima(d):
    return np.nonzero((d[1:-1] < d[:-2]) & (d[1:-1] < d[2:]))[0] + 1


def transverse_fringes(z, energy, src, cfg, n=20001):
    """Fringe count and contrast of the transverse profile at depth ``z``.

    The profile is sampled out to 1.3 times the classical beam radius
    ``2 sqrt(E_v z / F)`` (at least ``10a``), where ``E_v`` is the energy at
    the virtual source.

    Returns
    -------
    count : int
        Number of interior minima.
    contrast : float
        Largest ``(d_max - d_min) / (d_max + d_min)`` over the minima, with
        ``d_max`` the highest density beyond that minimum; 0 without minima.
    """
    ev = energy - cfg.mass * cfg.force_f ** 2 * src.width_a ** 4 / (2.0 * cfg.hbar ** 2)
    # the classical paraboloid has radius 2 sqrt(E z / F) at depth z
    radius = 2.0 * math.sqrt(max(ev, 0.0) * z / cfg.force_f)
    x_max = 1.3 * max(radius, 10.0 * src.width_a)
    x = np.linspace(0.0, x_max, n)
    d = transverse_profile(x, z, energy, src, cfg)
    mins = _local_minima(d)
    if len(mins) == 0:
        return 0, 0.0
    contrast = max((d[i:].max() - d[i]) / (d[i:].max() + d[i]) for i in mins)
    return int(len(mins)), float(contrast)
