"""Density of states of a 2D electron in crossed electric and magnetic fields.

The exact local density of states at the source is a sum of Landau levels,
each broadened by the electric field into an oscillator density:

    n(E) = 1/(2 pi l^2 Gamma) sum_k |u_k((E - E_k^0)/Gamma)|^2,
    E_k^0 = (2k + 1) hbar omega_L + Gamma^2 / (4 hbar omega_L),

with magnetic length ``l``, width ``Gamma = F l`` and ``|u_k|^2`` from
:func:`ballistic_green.specialfns.hermite_density`. Each level carries the
weight ``1/(2 pi l^2) = eB / (2 pi hbar)``.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from . import _quad
from .errors import DomainError, RangeError
from .green import dipped_contour
from .propagator import FieldConfig, crossed_return_propagator
from .specialfns import hermite_density

__all__ = [
    "DOSCurve", "LandauComb", "HallPoint", "landau_comb", "level_energy",
    "level_density", "dos_crossed", "dos_curve", "dos_with_spin",
    "integrated_dos", "hall_resistivity", "classical_hall_resistivity",
    "critical_field", "dos_laplace_oracle", "truncation_range",
]

KMAX = 500


@dataclass(frozen=True)
class DOSCurve:
    """Sampled density of states with the metadata that produced it."""

    energies: np.ndarray
    density: np.ndarray
    k_max_used: int
    gamma: float
    larmor: float

    def __post_init__(self):
        if np.any(np.diff(self.energies) <= 0):
            raise DomainError("energies must be strictly increasing")


@dataclass(frozen=True)
class LandauComb:
    """Pure-magnetic-field limit: equally weighted, equidistant levels."""

    energies: np.ndarray
    weight: float


@dataclass(frozen=True)
class HallPoint:
    """One point of a Hall-resistivity trace."""

    b: float
    rho_xy: float
    n_carriers: float
    excluded: bool = False


def _require(cfg):
    if cfg.larmor <= 0 or cfg.force_f <= 0:
        raise DomainError("crossed-field DOS requires larmor > 0 and force_f > 0")


def landau_comb(cfg, n_levels):
    """Landau comb ``E_k = (2k+1) hbar omega_L`` with weight ``eB/2 pi hbar``."""
    if cfg.larmor <= 0:
        raise DomainError("landau_comb requires larmor > 0")
    k = np.arange(n_levels)
    return LandauComb(energies=(2 * k + 1) * cfg.hbar * cfg.larmor,
                      weight=1.0 / (2 * math.pi * cfg.magnetic_length ** 2))


def level_energy(k, cfg):
    """Center of level ``k``: ``(2k+1) hbar omega_L + Gamma^2/(4 hbar omega_L)``."""
    return (2 * np.asarray(k) + 1) * cfg.hbar * cfg.larmor + cfg.level_shift


def _buffer(tol):
    # |u_k(xi)|^2 beyond the turning point falls off faster than exp(-b^2)
    return max(6.0, math.sqrt(max(0.0, -math.log(tol))))


def truncation_range(energy, cfg, tol=1e-12):
    """Levels ``k_lo..k_hi`` that contribute at ``energy``.

    A level is kept while ``|E - E_k^0| <= Gamma (sqrt(2k+1) + b)`` with
    buffer ``b = max(6, sqrt(-ln tol))``.

    Raises
    ------
    RangeError
        If levels beyond ``k = 500`` would still contribute.
    """
    g = cfg.gamma
    b = _buffer(tol)
    hw = cfg.hbar * cfg.larmor
    e = float(energy) - cfg.level_shift
    # k_hi: last k with (2k+1) hw - e <= g (sqrt(2k+1) + b). Solve in s = sqrt(2k+1).
    s_hi = (g + math.sqrt(g * g + 4 * hw * (e + g * b))) / (2 * hw) if e + g * b > -g * g / (4 * hw) else 0.0
    k_hi = int(math.floor((s_hi * s_hi - 1) / 2)) if s_hi > 0 else -1
    if k_hi > KMAX:
        raise RangeError(f"dos truncation needs k up to {k_hi} > {KMAX}")
    # k_lo: first k with e - (2k+1) hw <= g (sqrt(2k+1) + b)
    disc = g * g + 4 * hw * (e - g * b)
    s_lo = (-g + math.sqrt(disc)) / (2 * hw) if disc > 0 and e - g * b > 0 else 0.0
    k_lo = max(0, int(math.floor((s_lo * s_lo - 1) / 2)))
    return k_lo, k_hi


def level_density(k, energy, cfg):
    """Contribution of level ``k`` to ``n(E)``."""
    _require(cfg)
    g = cfg.gamma
    xi = (np.asarray(energy, dtype=float) - level_energy(k, cfg)) / g
    res = hermite_density(k, xi) / (2 * math.pi * cfg.magnetic_length ** 2 * g)
    return res


def dos_crossed(energy, cfg, tol=1e-12):
    """Exact crossed-field density of states ``n(E)`` at the source.

    Parameters
    ----------
    energy : float or array_like
    cfg : FieldConfig
        Needs ``larmor > 0`` and ``force_f > 0``.
    tol : float
        Controls the truncation buffer (see :func:`truncation_range`).

    Returns
    -------
    float or ndarray
    """
    _require(cfg)
    e = np.atleast_1d(np.asarray(energy, dtype=float))
    ranges = [truncation_range(x, cfg, tol) for x in e]
    out = np.zeros_like(e)
    if not ranges:
        return out
    k_top = max(r[1] for r in ranges)
    klo = np.array([r[0] for r in ranges])
    khi = np.array([r[1] for r in ranges])
    for k in range(0, k_top + 1):
        m = (klo <= k) & (khi >= k)
        if m.any():
            out[m] += level_density(k, e[m], cfg)
    if np.ndim(energy) == 0:
        return float(out[0])
    return out.reshape(np.shape(energy))


def dos_curve(energies, cfg, tol=1e-12):
    """:func:`dos_crossed` on a grid, packaged as a :class:`DOSCurve`."""
    e = np.asarray(energies, dtype=float)
    k_used = max(truncation_range(x, cfg, tol)[1] for x in e)
    return DOSCurve(energies=e, density=dos_crossed(e, cfg, tol), k_max_used=int(k_used),
                    gamma=cfg.gamma, larmor=cfg.larmor)


def dos_with_spin(energy, cfg, g_factor, tol=1e-12):
    """Sum of both spin densities ``n(E + g hbar w/2) + n(E - g hbar w/2)``."""
    shift = 0.5 * g_factor * cfg.hbar * cfg.larmor
    e = np.asarray(energy, dtype=float)
    return dos_crossed(e + shift, cfg, tol) + dos_crossed(e - shift, cfg, tol)


def _level_cdf(k, x, buffer, tol):
    """``int_{-inf}^x |u_k(xi)|^2 d xi`` by adaptive quadrature."""
    edge = math.sqrt(2 * k + 1) + buffer + 2.0
    if x <= -edge:
        return 0.0
    if x >= edge:
        return 1.0
    f = lambda xi: hermite_density(k, xi)
    # integrate over the shorter side to limit cancellation
    if x <= 0:
        val, _ = _quad.gk_quad(f, -edge, x, epsabs=0.1 * tol, epsrel=1e-14, initial=max(8, k + 4))
        return float(val)
    val, _ = _quad.gk_quad(f, x, edge, epsabs=0.1 * tol, epsrel=1e-14, initial=max(8, k + 4))
    return 1.0 - float(val)


def integrated_dos(e_f, cfg, tol=1e-12):
    """Integrated density of states ``N(E_F) = int_{-inf}^{E_F} n(E) dE``.

    Evaluated level by level; each level's cumulative oscillator density is
    integrated adaptively to absolute accuracy ``tol``.
    """
    _require(cfg)
    b = _buffer(tol)
    g = cfg.gamma
    weight = 1.0 / (2 * math.pi * cfg.magnetic_length ** 2)
    _, k_hi = truncation_range(e_f, cfg, tol)
    total = 0.0
    for k in range(0, k_hi + 1):
        x = (e_f - float(level_energy(k, cfg))) / g
        total += _level_cdf(k, x, b, tol)
    return weight * total


def hall_resistivity(e_f, b_range, template, tol=1e-12):
    """Hall resistivity ``rho_xy = B / (e N(E_F; B))`` along a field sweep.

    Parameters
    ----------
    e_f : float
        Fermi energy, held fixed along the sweep.
    b_range : sequence of float
        Magnetic fields (natural units, ``B = 2 m omega_L / e``).
    template : FieldConfig
        Supplies ``force_f``, ``mass`` and ``hbar``.

    Returns
    -------
    list of HallPoint
        Points with ``N = 0`` are flagged ``excluded`` with ``rho_xy = inf``.
    """
    out = []
    for b in b_range:
        if b <= 0:
            raise DomainError("magnetic fields must be positive")
        cfg = FieldConfig(force_f=template.force_f, larmor=b / (2 * template.mass),
                          mass=template.mass, hbar=template.hbar)
        n = integrated_dos(e_f, cfg, tol)
        if n <= 0:
            out.append(HallPoint(b=float(b), rho_xy=math.inf, n_carriers=0.0, excluded=True))
        else:
            out.append(HallPoint(b=float(b), rho_xy=b / n, n_carriers=n))
    return out


def classical_hall_resistivity(b, e_f, mass=1.0, hbar=1.0):
    """Classical line ``B / (e N_cl)`` with the 2D free density ``m E_F / 2 pi hbar^2``."""
    n_cl = mass * e_f / (2 * math.pi * hbar ** 2)
    return np.asarray(b, dtype=float) / n_cl


def critical_field(b, c_threshold=0.1, mass=1.0, hbar=1.0, charge=1.0):
    """Electric field at which the level width reaches a fraction of the spacing.

    Solves ``Gamma = e E l = c * 2 hbar omega_L`` with ``l = sqrt(hbar/eB)``
    and ``2 hbar omega_L = hbar e B / m``, giving

        E_crit = c * sqrt(hbar * e) * B**1.5 / m.

    Works in any consistent unit system (SI by passing SI constants).
    """
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0) or c_threshold <= 0:
        raise DomainError("critical_field requires b > 0 and c_threshold > 0")
    res = c_threshold * math.sqrt(hbar * charge) * b ** 1.5 / mass
    return float(res) if res.ndim == 0 else res


def _free_2d_tail(energy, eta, cfg):
    # -Im G_0 / pi for the 1/t part of the propagator, damped by eta; the
    # extra pi/2 is the half-weight of the delta function at t = 0 coming
    # from the retarded 1/(t - i0) prescription
    return cfg.mass / (2 * math.pi ** 2 * cfg.hbar ** 2) * (0.5 * math.pi + math.atan2(energy, eta))


def dos_laplace_oracle(energy, cfg, eta=None, depth=None, epsrel=1e-10):
    """Density of states from the time-domain return propagator.

    ``n(E) = (1/pi hbar) Re int_0^inf dt exp(i (E + i eta) t / hbar) [K(t) - K_0(t)]
    + n_0(E, eta)``, where ``K_0 = m / (2 pi i hbar t)`` is the free 2D
    return amplitude whose transform ``n_0`` is known in closed form. The
    integral runs along a contour dipped below the real axis (the retarded
    side), which passes under the poles at ``omega_L t = k pi``. The result
    is Richardson-extrapolated from ``eta`` and ``eta / 2``.
    """
    _require(cfg)
    w = cfg.larmor
    eta = 1e-8 * cfg.hbar * w if eta is None else eta
    depth = 0.2 / w if depth is None else depth
    t_of, dt_of = dipped_contour(depth)
    m, hb = cfg.mass, cfg.hbar
    # the integrand decays like exp(-c s^2) with c = F^2 tanh(w depth) / (8 m hbar w)
    c = cfg.force_f ** 2 * math.tanh(w * depth) / (8 * m * hb * w)
    s_gauss = math.sqrt(40.0 / c)

    def one(et):
        z = energy + 1j * et
        t_max = min(30.0 * hb / et, s_gauss)

        def f(s):
            t = t_of(s)
            k = crossed_return_propagator(t, cfg) - m / (2j * math.pi * hb * t)
            return dt_of(s) * np.exp(1j * z * t / hb) * k
        period = math.pi / w
        bps = [j * period for j in range(1, int(t_max / period) + 1)]
        val, _ = _quad.gk_quad(f, 0.0, t_max, epsabs=1e-14, epsrel=epsrel, initial=4,
                               breakpoints=bps)
        # - int_{t_c}^inf exp(i z t / hbar) K_0(t) dt along the horizontal line
        t_c = complex(t_of(t_max))
        val -= m / (2j * math.pi * hb) * special.exp1(-1j * z * t_c / hb)
        return val.real / (math.pi * hb) + _free_2d_tail(energy, et, cfg)

    return 2.0 * one(0.5 * eta) - one(eta)
