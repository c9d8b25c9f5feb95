"""Time-dependent propagators and the classical action in crossed fields.

All quantities are in natural units unless ``mass``/``hbar`` are given; the
electron charge is 1, so the electric force is ``F = e E`` and the magnetic
field is ``B = 2 m omega_L``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, SingularityError

__all__ = [
    "FieldConfig", "free_propagator", "crossed_return_propagator",
    "crossed_prefactor", "classical_action", "linear_field_propagator",
]

# relative half-width of the excluded window around omega_L t = k pi
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class FieldConfig:
    """Crossed electric and magnetic field, or a pure uniform force.

    Parameters
    ----------
    force_f : float
        Electric force ``F = e E`` (>= 0).
    larmor : float
        Larmor frequency ``omega_L = e B / 2m`` (>= 0).
    mass, hbar : float
        Particle mass and Planck constant.
    drift_v : float, optional
        Drift velocity ``v_D = E/B = F / (2 m omega_L)``. Computed when
        omitted; a supplied value must agree with it.
    """

    force_f: float
    larmor: float
    mass: float = 1.0
    hbar: float = 1.0
    drift_v: float = field(default=None)

    def __post_init__(self):
        if self.force_f < 0 or self.larmor < 0:
            raise DomainError("force_f and larmor must be non-negative")
        if self.mass <= 0 or self.hbar <= 0:
            raise DomainError("mass and hbar must be positive")
        implied = (self.force_f / (2.0 * self.mass * self.larmor)) if self.larmor > 0 else 0.0
        if self.drift_v is None:
            object.__setattr__(self, "drift_v", implied)
        elif not math.isclose(self.drift_v, implied, rel_tol=1e-10, abs_tol=1e-300):
            raise DomainError(f"drift_v={self.drift_v} inconsistent with F/(2 m omega_L)={implied}")

    @classmethod
    def from_drift(cls, drift_v, larmor, mass=1.0, hbar=1.0):
        """Build from drift velocity and Larmor frequency."""
        return cls(force_f=2.0 * mass * larmor * drift_v, larmor=larmor, mass=mass, hbar=hbar)

    @property
    def beta(self):
        """Airy scale ``beta = (m / (4 hbar^2 F^2))^{1/3}``."""
        if self.force_f <= 0:
            raise DomainError("beta requires force_f > 0")
        return (self.mass / (2.0 * self.hbar * self.force_f) ** 2) ** (1.0 / 3.0)

    @property
    def magnetic_length(self):
        """``l = sqrt(hbar / (2 m omega_L)) = sqrt(hbar / eB)``."""
        if self.larmor <= 0:
            raise DomainError("magnetic length requires larmor > 0")
        return math.sqrt(self.hbar / (2.0 * self.mass * self.larmor))

    @property
    def gamma(self):
        """Level width ``Gamma = F l``."""
        return self.force_f * self.magnetic_length

    @property
    def level_shift(self):
        """Energy offset ``Gamma^2 / (4 hbar omega_L) = m v_D^2 / 2``."""
        return self.gamma ** 2 / (4.0 * self.hbar * self.larmor)


def _check_time(t):
    if not np.all(np.asarray(t) > 0):
        raise DomainError("propagator requires t > 0")


def _free_kernel(dist2, t, dim, mass, hbar):
    """Free propagator for squared distance ``dist2`` at (possibly complex) t.

    The branch of ``(m / 2 pi i hbar t)^{dim/2}`` is the one continuous from
    positive real ``t`` into the lower half plane.
    """
    t = np.asarray(t, dtype=complex)
    pref = (mass / (2.0 * math.pi * hbar)) ** (0.5 * dim) * np.exp(-0.25j * math.pi * dim)
    return pref * t ** (-0.5 * dim) * np.exp(0.5j * mass * dist2 / (hbar * t))


def free_propagator(x, xp, t, dim=1, mass=1.0, hbar=1.0):
    """Free-particle propagator ``K(x, t | x', 0)`` in ``dim`` dimensions.

    ``[m/(2 pi i hbar t)]^{dim/2} exp(i m |x - x'|^2 / (2 hbar t))`` with the
    branch ``i^{1/2} = exp(i pi/4)``.

    Parameters
    ----------
    x, xp : float or array_like
        Positions. For ``dim > 1`` the last axis holds the components.
    t : float or array_like
        Elapsed time, strictly positive.
    dim : int
        1, 2 or 3.
    """
    if dim not in (1, 2, 3):
        raise DomainError("dim must be 1, 2 or 3")
    _check_time(t)
    diff = np.asarray(x, dtype=float) - np.asarray(xp, dtype=float)
    d2 = diff ** 2 if dim == 1 else np.sum(diff ** 2, axis=-1)
    res = _free_kernel(d2, t, dim, mass, hbar)
    return complex(res) if np.ndim(res) == 0 else res


def linear_field_propagator(r, rp, t, force_f, mass=1.0, hbar=1.0):
    """3D propagator in the potential ``V = -F z`` (force along +z).

    ``K = K_free(r - r', t) exp{i [F t (z + z')/2 - F^2 t^3/(24 m)] / hbar}``.
    Accepts complex ``t`` in the lower half plane.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    d2 = np.sum((r - rp) ** 2, axis=-1)
    zs = r[..., 2] + rp[..., 2]
    t = np.asarray(t, dtype=complex)
    phase = (0.5 * force_f * t * zs - force_f ** 2 * t ** 3 / (24.0 * mass)) / hbar
    return _free_kernel(d2, t, 3, mass, hbar) * np.exp(1j * phase)


def _check_singular(t, cfg):
    tr = np.real(np.asarray(t))
    period = math.pi / cfg.larmor
    k = np.round(tr / period)
    near = np.abs(tr - k * period) < SINGULAR_TOL * period
    if np.iscomplexobj(t):
        near &= np.abs(np.imag(t)) < SINGULAR_TOL * period
    if np.any(near):
        bad = float(np.atleast_1d(tr)[np.atleast_1d(near)][0])
        raise SingularityError(f"sin(omega_L t) = 0 at t = {bad}", time=bad)


def crossed_prefactor(t, cfg):
    """Van Vleck prefactor ``A(t) = -i m omega_L / (2 pi hbar sin(omega_L t))``."""
    if cfg.larmor <= 0:
        raise DomainError("crossed-field propagator requires larmor > 0")
    _check_singular(t, cfg)
    w = cfg.larmor
    res = -1j * cfg.mass * w / (2.0 * math.pi * cfg.hbar * np.sin(w * np.asarray(t)))
    return complex(res) if np.ndim(res) == 0 else res


def _action(t, cfg):
    w, v, m = cfg.larmor, cfg.drift_v, cfg.mass
    t = np.asarray(t)
    wt = w * t
    return 0.5 * m * v * v * t * (wt * np.cos(wt) / np.sin(wt) - 1.0)


def classical_action(t, cfg):
    """Classical action of the closed orbit returning to the origin after t.

    ``S = -(m/2) v_D^2 t + (m omega_L / 2) cot(omega_L t) v_D^2 t^2``.

    Raises
    ------
    SingularityError
        When ``omega_L t`` is within ``1e-12 pi`` of a multiple of ``pi``.
    """
    if cfg.larmor <= 0:
        raise DomainError("classical_action requires larmor > 0")
    _check_singular(t, cfg)
    res = _action(t, cfg)
    return float(res) if np.ndim(res) == 0 and not np.iscomplexobj(res) else res


def crossed_return_propagator(t, cfg):
    """Return propagator ``K(o, t | o, 0)`` for a 2D electron in crossed fields.

    ``-(i m omega_L) / (2 pi hbar sin(omega_L t))
    * exp{i F^2 t [omega_L t cot(omega_L t) - 1] / (8 m hbar omega_L^2)}``

    Complex ``t`` (below the real axis) is accepted, which is how the
    energy-domain oracles avoid the real poles at ``omega_L t = k pi``.
    """
    pref = crossed_prefactor(t, cfg)
    w = cfg.larmor
    tt = np.asarray(t)
    wt = w * tt
    phase = cfg.force_f ** 2 * tt * (wt * np.cos(wt) / np.sin(wt) - 1.0) / (8.0 * cfg.mass * cfg.hbar * w * w)
    res = pref * np.exp(1j * phase)
    return complex(res) if np.ndim(res) == 0 else res
