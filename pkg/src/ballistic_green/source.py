"""Currents emitted by stationary quantum sources.

A source ``sigma(r)`` drives the inhomogeneous Schroedinger equation
``(E - H) psi = sigma``, solved by ``psi = int G(r, r'; E) sigma(r') d^3r'``.
The total particle current it emits is the bilinear form

    J(E) = -(2 / hbar) Im int int sigma*(r) G(r, r'; E) sigma(r') d^3r d^3r'.

For a reciprocal Green function (``G(r, r') = G(r', r)``) only ``Im G``
contributes, and ``Im G`` is finite at coincidence even where ``Re G``
diverges, so the double integral is evaluated on ``Im G`` alone.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import simpson

from . import _quad
from .errors import ContractError, DomainError, ResonanceError
from .specialfns import airy_ai

__all__ = [
    "SourceSpec", "RadialProfile", "total_current_bilinear", "total_current_point",
    "discrete_resolvent_current", "discrete_eigen_current", "wigner_current",
    "field_wigner_current", "source_quadrature",
]


@dataclass(frozen=True)
class RadialProfile:
    """Radial function ``sigma_00(r)`` sampled on an increasing grid."""

    r: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or np.any(np.diff(r) <= 0):
            raise DomainError("radial profile needs matching 1-D arrays on an increasing grid")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)
        peak = np.max(np.abs(v))
        if peak == 0 or abs(v[-1]) >= 1e-12 * peak:
            raise DomainError("radial profile must decay below 1e-12 of its peak at the grid end")

    @classmethod
    def from_function(cls, func, r_max, n=4001):
        r = np.linspace(0.0, r_max, n)
        return cls(r=r, values=np.asarray(func(r), dtype=float))


@dataclass(frozen=True)
class SourceSpec:
    """Description of a source distribution.

    Parameters
    ----------
    kind : {"point", "gaussian", "radial-multipole-s"}
    position : array_like, shape (3,)
    strength : complex
        ``C`` for a point source; ``hbar Omega`` for a Gaussian (which then
        has ``sigma = hbar Omega N0 exp(-r^2 / 2a^2)``, ``N0 = a^{-3/2} pi^{-3/4}``);
        an overall factor for the multipole kind.
    width_a : float
        Gaussian width ``a`` (> 0 for the Gaussian kind).
    radial_profile : RadialProfile
        For the multipole kind: ``sigma(r) = strength sigma_00(|r - R|) / sqrt(4 pi)``.
    """

    kind: str
    position: tuple = (0.0, 0.0, 0.0)
    strength: complex = 1.0
    width_a: float = None
    radial_profile: RadialProfile = None

    def __post_init__(self):
        if self.kind not in ("point", "gaussian", "radial-multipole-s"):
            raise DomainError(f"unknown source kind {self.kind!r}")
        if self.kind == "gaussian" and not (self.width_a and self.width_a > 0):
            raise DomainError("gaussian source needs width_a > 0")
        if self.kind == "radial-multipole-s" and self.radial_profile is None:
            raise DomainError("multipole source needs a radial_profile")
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))

    def norm_squared(self):
        """``int |sigma|^2 d^3r``."""
        s2 = abs(self.strength) ** 2
        if self.kind == "point":
            raise DomainError("a point source has no finite L2 norm")
        if self.kind == "gaussian":
            return s2
        p = self.radial_profile
        # the 1/sqrt(4 pi) of sigma cancels the solid angle
        return s2 * float(simpson(p.r ** 2 * p.values ** 2, x=p.r))


def source_quadrature(src, n_nodes=10):
    """Nodes ``(N, 3)`` and complex weights ``sigma_i w_i`` for a source.

    Gaussian sources use a tensor Gauss-Hermite rule; s-wave multipole
    sources a Gauss-Legendre radial rule times a product angular rule.
    """
    c = np.asarray(src.position)
    if src.kind == "gaussian":
        a = src.width_a
        x, w = np.polynomial.hermite.hermgauss(n_nodes)
        # int f(r) exp(-r^2/2a^2) d^3r with r = sqrt(2) a x
        pts = math.sqrt(2.0) * a * x
        g = np.stack(np.meshgrid(pts, pts, pts, indexing="ij"), axis=-1).reshape(-1, 3)
        ww = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
        ww = ww * (math.sqrt(2.0) * a) ** 3
        n0 = a ** -1.5 * math.pi ** -0.75
        return g + c, src.strength * n0 * ww
    if src.kind == "radial-multipole-s":
        p = src.radial_profile
        rr, wr = _quad.gauss_legendre(n_nodes, 0.0, float(p.r[-1]))
        sig = np.interp(rr, p.r, p.values)
        mu, wmu = np.polynomial.legendre.leggauss(n_nodes)
        nphi = 2 * n_nodes
        phi = 2 * math.pi * np.arange(nphi) / nphi
        wphi = np.full(nphi, 2 * math.pi / nphi)
        R, MU, PHI = np.meshgrid(rr, mu, phi, indexing="ij")
        st = np.sqrt(1 - MU ** 2)
        pts = np.stack([R * st * np.cos(PHI), R * st * np.sin(PHI), R * MU], axis=-1).reshape(-1, 3)
        W = (wr[:, None, None] * rr[:, None, None] ** 2 * sig[:, None, None]
             * wmu[None, :, None] * wphi[None, None, :]).ravel()
        return pts + c, src.strength * W / math.sqrt(4 * math.pi)
    raise DomainError("source_quadrature is for extended sources")


def total_current_point(c, im_g_coincidence, hbar=1.0):
    """Current of a point source ``C delta(r - R)``: ``-(2/hbar) |C|^2 Im G(R, R; E)``.

    Raises
    ------
    ContractError
        If ``Im G > 0``, which a retarded Green function never has.
    """
    if im_g_coincidence > 0:
        raise ContractError("retarded Green function must have Im G(R, R; E) <= 0")
    return -2.0 / hbar * abs(c) ** 2 * im_g_coincidence


def total_current_bilinear(src, green_imag, energy, hbar=1.0, n_nodes=10, eps=1e-7, chunk=200000):
    """Total current ``J(E)`` of an arbitrary source.

    Parameters
    ----------
    src : SourceSpec
    green_imag : callable
        ``green_imag(r, rp, energy)`` for arrays of shape ``(N, 3)``,
        returning ``Im G`` (a complex return is reduced to its imaginary
        part). Coincident pairs are displaced by ``eps`` times the source
        width unless the callable handles them (it is first probed).
    n_nodes : int
        Nodes per dimension of the source quadrature.

    Returns
    -------
    float
    """
    if src.kind == "point":
        r = np.asarray(src.position, dtype=float)[None, :]
        g = green_imag(r, r, energy)
        g = np.imag(g) if np.iscomplexobj(g) else np.asarray(g, dtype=float)
        return total_current_point(src.strength, float(np.ravel(g)[0]), hbar)
    pts, wts = source_quadrature(src, n_nodes)
    n = len(pts)
    scale = src.width_a if src.kind == "gaussian" else float(src.radial_profile.r[-1])
    ii, jj = np.triu_indices(n)
    total = 0.0 + 0.0j
    for lo in range(0, len(ii), chunk):
        i, j = ii[lo:lo + chunk], jj[lo:lo + chunk]
        r, rp = pts[i], pts[j].copy()
        same = i == j
        try:
            g = green_imag(r, rp, energy)
        except (DomainError, ZeroDivisionError):
            rp[same, 0] += eps * scale
            g = green_imag(r, rp, energy)
        g = np.imag(g) if np.iscomplexobj(g) else np.asarray(g, dtype=float)
        mult = np.where(same, 1.0, 2.0)
        # Re(sigma_i* sigma_j) for the symmetric real kernel Im G
        total += np.sum(mult * g * np.real(np.conj(wts[i]) * wts[j]))
    return float(-2.0 / hbar * total.real)


def discrete_resolvent_current(h, sigma, energy, eta, hbar=1.0):
    """``-(2/hbar) Im <sigma| (E + i eta - H)^{-1} |sigma>`` for a matrix model.

    Raises
    ------
    ResonanceError
        If the shifted matrix is numerically singular.
    """
    if eta <= 0:
        raise DomainError("eta must be positive")
    h = np.asarray(h, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    a = (energy + 1j * eta) * np.eye(len(h)) - h
    try:
        x = np.linalg.solve(a, sigma)
    except np.linalg.LinAlgError as exc:
        raise ResonanceError(f"singular resolvent: {exc}") from None
    return float(-2.0 / hbar * np.imag(np.vdot(sigma, x)))


def discrete_eigen_current(h, sigma, energy, eta, hbar=1.0):
    """Golden-rule form ``(2 pi / hbar) sum_f |<f|sigma>|^2 L_eta(E - E_f)``.

    ``L_eta(x) = (eta / pi) / (x^2 + eta^2)`` is the Lorentzian broadening
    of ``delta(E - H)``; for every ``eta`` this equals
    :func:`discrete_resolvent_current`.
    """
    evals, evecs = np.linalg.eigh(np.asarray(h, dtype=complex))
    amp = np.abs(evecs.conj().T @ np.asarray(sigma, dtype=complex)) ** 2
    e = np.atleast_1d(np.asarray(energy, dtype=float))
    lor = (eta / math.pi) / ((e[:, None] - evals[None, :]) ** 2 + eta ** 2)
    res = 2 * math.pi / hbar * lor @ amp
    return float(res[0]) if np.ndim(energy) == 0 else res


def _fourier_sine_moment(profile, k):
    """``int_0^inf (r / k) sin(k r) sigma_00(r) dr`` for a sampled profile."""
    r, v = profile.r, profile.values
    # sin(kr)/k computed stably for small k
    kr = k * r
    sinc = np.where(kr < 1e-4, r * (1 - kr * kr / 6.0), np.sin(kr) / np.where(k > 0, k, 1.0))
    y = r * sinc * v
    return float(simpson(y, x=r))


def wigner_current(sigma00, energy, mass=1.0, hbar=1.0):
    """Threshold law of an s-wave source, ``J = k [int (r/k) sin(kr) sigma_00 dr]^2``.

    The overall constant is set to 1; only the energy dependence matters.
    Near threshold ``J ~ k ~ sqrt(E)``.

    Parameters
    ----------
    sigma00 : RadialProfile
    energy : float
        Positive kinetic energy.
    """
    if energy <= 0:
        raise DomainError("wigner_current requires energy > 0")
    if not isinstance(sigma00, RadialProfile):
        raise DomainError("sigma00 must be a RadialProfile")
    k = math.sqrt(2 * mass * energy) / hbar
    return k * _fourier_sine_moment(sigma00, k) ** 2


def field_wigner_current(energy, beta):
    """Threshold law in a uniform force field, ``Ai'(-2 beta E)^2 + 2 beta E Ai(-2 beta E)^2``.

    Defined for all real ``E``; positive below threshold (tunneling) and
    proportional to ``sqrt(E)`` far above it.
    """
    if beta <= 0:
        raise DomainError("field_wigner_current requires beta > 0")
    x = -2.0 * beta * np.asarray(energy, dtype=float)
    ai, aip = airy_ai(x)
    res = aip ** 2 - x * ai ** 2
    return float(res) if np.ndim(res) == 0 else res
