"""Moshinsky shutter: diffraction in time of a suddenly released beam.

A monochromatic beam ``exp(ikx)`` fills ``x < 0`` until a shutter at the
origin opens at ``t = 0``. The free evolution is

    psi(x, t) = M(x; k; hbar t / m),
    M(x; k; tau) = 1/2 exp(i k x - i k^2 tau / 2) erfc[(x - k tau) / sqrt(2 i tau)],

with ``sqrt(i) = exp(i pi / 4)``. The density can equivalently be written
through Fresnel integrals of ``u = (hbar k t / m - x) / sqrt(pi hbar t / m)``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError
from .specialfns import erfc_complex, fresnel

__all__ = [
    "ShutterState", "moshinsky_m", "shutter_density", "shutter_wavefunction",
    "shutter_u", "classical_front",
]

_SQRT_I = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


@dataclass(frozen=True)
class ShutterState:
    """Beam wavenumber and particle constants."""

    k: float
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.k <= 0:
            raise DomainError("beam wavenumber k must be positive")
        if self.mass <= 0 or self.hbar <= 0:
            raise DomainError("mass and hbar must be positive")


def moshinsky_m(x, k, tau):
    """Moshinsky function ``M(x; k; tau)``.

    Parameters
    ----------
    x : float or array_like
    k : float
    tau : float
        ``hbar t / m``, strictly positive.
    """
    if tau <= 0:
        raise DomainError("moshinsky_m requires tau > 0")
    x = np.asarray(x, dtype=float)
    z = (x - k * tau) / (math.sqrt(2.0 * tau) * _SQRT_I)
    res = 0.5 * np.exp(1j * (k * x - 0.5 * k * k * tau)) * erfc_complex(z)
    return complex(res) if np.ndim(res) == 0 else res


def shutter_u(x, t, st):
    """Fresnel variable ``u = (hbar k t/m - x) / sqrt(pi hbar t / m)``."""
    if np.any(np.asarray(t) <= 0):
        raise DomainError("t must be positive")
    tau = st.hbar * np.asarray(t, dtype=float) / st.mass
    return (st.k * tau - np.asarray(x, dtype=float)) / np.sqrt(math.pi * tau)


def shutter_density(u):
    """``|psi|^2 = 1/2 {[1/2 + C(u)]^2 + [1/2 + S(u)]^2}``."""
    fp = fresnel(u)
    return 0.5 * ((0.5 + fp.c) ** 2 + (0.5 + fp.s) ** 2)


def shutter_wavefunction(x, t, st):
    """Wavefunction after the shutter opens, ``M(x; k; hbar t / m)``."""
    if t <= 0:
        raise DomainError("shutter_wavefunction requires t > 0")
    return moshinsky_m(x, st.k, st.hbar * t / st.mass)


def classical_front(t, st):
    """Position ``hbar k t / m`` reached by the classical beam front."""
    return st.hbar * st.k * t / st.mass
