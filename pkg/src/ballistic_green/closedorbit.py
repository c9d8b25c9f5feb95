"""Closed-orbit (semiclassical) density of states in crossed fields.

Electrons leave the origin with energy ``E``; the ones that come back
after a time ``t_k`` contribute an oscillatory term to the density of
states. Times of flight solve ``E(t) = -dS/dt`` with the closed-orbit
action ``S(t)`` of :func:`ballistic_green.propagator.classical_action`.

With ``s = omega_L t`` the energy of time reads

    E(t) = (m v_D^2 / 2) [(s - sin s cos s)^2 + sin^4 s] / sin^2 s,

so ``E >= 0``. On the first branch ``0 < s < pi`` it rises monotonically
from 0; every later branch ``(k-1) pi < s < k pi`` is a valley with a
single minimum, giving zero or two closed orbits (one at the threshold).
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import optimize

from .errors import AccuracyError, DegeneracyError, DomainError
from .propagator import FieldConfig, _action, _check_singular

__all__ = [
    "ClosedOrbit", "Trajectory", "trajectory_position", "orbit_geometry",
    "energy_of_time", "action_second_derivative", "initial_velocity",
    "find_closed_orbits", "dos_semiclassical", "branch_thresholds", "orbit_count",
]

GRID_PER_BRANCH = 2048
EDGE_MARGIN = 1e-6
DEGENERATE_SDDOT = 1e-14


@dataclass(frozen=True)
class ClosedOrbit:
    """One closed orbit returning to the source.

    ``amplitude`` is the complete complex term of the orbit sum, so that
    the orbit adds ``2 Re(amplitude)`` to the density of states.
    """

    branch_k: int
    time_t: float
    reduced_action_w: float
    sddot_sign: int
    amplitude: complex
    sddot: float = float("nan")


@dataclass(frozen=True)
class Trajectory:
    """Orbit leaving the origin with speed ``v0`` at angle ``theta``."""

    theta: float
    v0: float
    cfg: FieldConfig

    @classmethod
    def from_energy(cls, theta, energy, cfg):
        if energy < 0:
            raise DomainError("kinetic energy must be non-negative")
        return cls(theta=theta, v0=math.sqrt(2 * energy / cfg.mass), cfg=cfg)

    @property
    def energy(self):
        return 0.5 * self.cfg.mass * self.v0 ** 2

    @property
    def velocity(self):
        return np.array([self.v0 * math.cos(self.theta), self.v0 * math.sin(self.theta)])


def trajectory_position(traj, t):
    """Position at time ``t`` (scalar or array); shape ``(..., 2)``.

    Sum of the drift ``(v_D t, 0)``, a circular motion at the cyclotron
    frequency ``2 omega_L``, and a constant offset that puts the start at
    the origin.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("trajectory_position requires t >= 0")
    w = traj.cfg.larmor
    vd = traj.cfg.drift_v
    vx, vy = traj.velocity
    c, s = np.cos(2 * w * t), np.sin(2 * w * t)
    x = vd * t + (-vy * c + (vx - vd) * s + vy) / (2 * w)
    y = ((vx - vd) * c + vy * s + vd - vx) / (2 * w)
    return np.stack([x, y], axis=-1)


def orbit_geometry(traj):
    """Radius and center of the circle traced in the drift frame."""
    w = traj.cfg.larmor
    vd = traj.cfg.drift_v
    v0, th = traj.v0, traj.theta
    r2 = (v0 * v0 - 2 * v0 * vd * math.cos(th) + vd * vd) / (4 * w * w)
    center = np.array([v0 * math.sin(th), vd - v0 * math.cos(th)]) / (2 * w)
    return math.sqrt(max(r2, 0.0)), center


def _reduced_energy(s):
    """``E / (m v_D^2 / 2)`` as a function of ``s = omega_L t``."""
    sn, cs = np.sin(s), np.cos(s)
    return ((s - sn * cs) ** 2 + sn ** 4) / (sn * sn)


def energy_of_time(t, cfg):
    """Energy of the closed orbit with time of flight ``t``: ``-dS/dt``.

    ``(m/2) v_D^2 - (m omega_L v_D^2 / 2) [2 t cot(omega_L t) - omega_L t^2 / sin^2(omega_L t)]``
    """
    _check_singular(t, cfg)
    w, v, m = cfg.larmor, cfg.drift_v, cfg.mass
    t = np.asarray(t, dtype=float)
    wt = w * t
    res = 0.5 * m * v * v - 0.5 * m * w * v * v * (2 * t * np.cos(wt) / np.sin(wt) - w * t * t / np.sin(wt) ** 2)
    return float(res) if res.ndim == 0 else res


def action_second_derivative(t, cfg):
    """``d^2 S / dt^2 = m omega v^2 [cot - 2 s csc^2 + s^2 csc^2 cot]``, ``s = omega t``."""
    _check_singular(t, cfg)
    w, v, m = cfg.larmor, cfg.drift_v, cfg.mass
    s = w * np.asarray(t, dtype=float)
    cot = np.cos(s) / np.sin(s)
    csc2 = 1.0 / np.sin(s) ** 2
    res = m * w * v * v * (cot - 2 * s * csc2 + s * s * csc2 * cot)
    return float(res) if res.ndim == 0 else res


def initial_velocity(t, cfg):
    """Launch velocity of the orbit that returns to the origin after ``t``.

    Solves the linear system obtained from ``r(t) = 0`` in the trajectory
    equation for ``(v0x, v0y)``.
    """
    _check_singular(t, cfg)
    w, vd = cfg.larmor, cfg.drift_v
    c, s = math.cos(2 * w * t), math.sin(2 * w * t)
    # unknowns a = v0x - v_D, b = v0y
    mat = np.array([[s, 1.0 - c], [c - 1.0, s]])
    rhs = np.array([-2.0 * w * vd * t, 0.0])
    a, b = np.linalg.solve(mat, rhs)
    return np.array([a + vd, b])


def branch_thresholds(cfg, k_max):
    """Lowest energy reachable on each branch ``k = 1..k_max``.

    Branch 1 starts at zero energy; each later branch opens two orbits at
    its minimum, which is where the orbit count steps up.
    """
    out = [0.0]
    scale = 0.5 * cfg.mass * cfg.drift_v ** 2
    for k in range(2, k_max + 1):
        lo, hi = (k - 1) * math.pi, k * math.pi
        res = optimize.minimize_scalar(_reduced_energy, bounds=(lo + 1e-9, hi - 1e-9),
                                       method="bounded", options={"xatol": 1e-13})
        out.append(scale * float(res.fun))
    return np.array(out)


def _branch_roots(k, target, cfg):
    """Times of flight on branch ``k`` with reduced energy ``target``."""
    w = cfg.larmor
    lo, hi = (k - 1) * math.pi, k * math.pi
    margin = EDGE_MARGIN * math.pi
    s = np.linspace(lo + margin if k > 1 else 0.0, hi - margin, GRID_PER_BRANCH + 1)
    if k == 1:
        s = s[1:]
    f = _reduced_energy(s) - target
    # refine the valley minimum so close root pairs are always separated
    i = int(np.argmin(f))
    a, b = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
    if k > 1 and a < b:
        res = optimize.minimize_scalar(_reduced_energy, bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-14})
        s_min, f_min = float(res.x), float(res.fun) - target
        # a target on the valley floor is a double root: the two orbits
        # merge and S'' vanishes, which root polishing cannot resolve
        if abs(f_min) <= 64 * np.finfo(float).eps * max(target, 1.0):
            raise DegeneracyError(f"degenerate saddle at t={s_min / w} (branch {k})")
        j = np.searchsorted(s, s_min)
        s = np.insert(s, j, s_min)
        f = np.insert(f, j, f_min)
    roots = []
    sign = np.sign(f)
    for j in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        try:
            r = optimize.brentq(lambda x: _reduced_energy(x) - target, s[j], s[j + 1],
                                xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        except (RuntimeError, ValueError) as exc:
            raise AccuracyError(f"root polish failed on branch {k}: {exc}") from None
        roots.append(r / w)
    return roots


def _orbit(k, t, energy, cfg):
    hb, m, w = cfg.hbar, cfg.mass, cfg.larmor
    sdd = action_second_derivative(t, cfg)
    scale = m * w * cfg.drift_v ** 2
    if abs(sdd) < DEGENERATE_SDDOT * max(scale, 1e-300):
        raise DegeneracyError(f"degenerate saddle at t={t} (branch {k})")
    wk = float(_action(t, cfg)) + energy * t
    sig = 1 if sdd > 0 else -1
    amp = (m * w / (4 * math.pi ** 2 * 1j * hb ** 2)
           * np.exp(1j * wk / hb + 1j * math.pi * sig / 4)
           / (math.sin(w * t) * math.sqrt(abs(sdd) / (2 * math.pi * hb))))
    return ClosedOrbit(branch_k=k, time_t=float(t), reduced_action_w=wk, sddot_sign=sig,
                       amplitude=complex(amp), sddot=float(sdd))


def find_closed_orbits(energy, cfg, k_limit=64):
    """All closed orbits at ``energy`` on branches ``1..k_limit``.

    Parameters
    ----------
    energy : float
        Positive emission energy.
    cfg : FieldConfig
        Needs ``drift_v > 0`` and ``larmor > 0``.
    k_limit : int
        Highest branch searched. The search stops early once a branch
        minimum lies above ``energy`` (minima grow with ``k``).

    Returns
    -------
    list of ClosedOrbit
        Ordered by time of flight.
    """
    if energy <= 0:
        raise DomainError("find_closed_orbits requires energy > 0")
    if cfg.drift_v <= 0 or cfg.larmor <= 0:
        raise DomainError("find_closed_orbits requires v_D > 0 and omega_L > 0")
    target = energy / (0.5 * cfg.mass * cfg.drift_v ** 2)
    orbits = []
    for k in range(1, k_limit + 1):
        # on branch k the reduced energy is at least (s - 1/2)^2 >= ((k-1) pi - 1/2)^2
        if k > 1 and ((k - 1) * math.pi - 0.5) ** 2 > target:
            break
        for t in _branch_roots(k, target, cfg):
            orbits.append(_orbit(k, t, energy, cfg))
    return orbits


def orbit_count(energy, cfg, k_limit=64):
    """Number of closed orbits at ``energy``."""
    return len(find_closed_orbits(energy, cfg, k_limit))


def dos_semiclassical(energy, cfg, k_limit=64, orbits=None):
    """Closed-orbit approximation to the crossed-field density of states.

    ``m / (2 pi hbar^2) + 2 Re sum_k amplitude_k``; the first term is the
    residue of the propagator's pole at ``t = 0``. Orbits whose amplitude is
    below ``1e-12`` of the residue term are dropped.

    Raises
    ------
    DegeneracyError
        When an orbit sits exactly at a branch threshold.
    """
    if orbits is None:
        orbits = find_closed_orbits(energy, cfg, k_limit)
    base = cfg.mass / (2 * math.pi * cfg.hbar ** 2)
    total = 0.0
    for orb in orbits:
        if abs(orb.amplitude) < 1e-12 * base:
            continue
        total += 2.0 * orb.amplitude.real
    return base + total
