"""Scanning tunneling microscope images of adatoms on a surface.

The Green function is assembled in three steps.

1. ``g1(z, z'; E_z)`` solves the one-dimensional problem across a
   piecewise-linear model potential: a tunneling barrier for ``z < 0``
   (the tip side), a flat well ``0 < z < z_w`` holding the surface state and
   an absorbing wall beyond ``z_w``.
2. ``G_sym`` adds free lateral motion by integrating ``g1`` over the
   lateral momentum with ``E_z = E - hbar^2 k^2 / 2M``.
3. Adatoms at ``z = 0`` are s-wave point scatterers of strength ``t0``;
   multiple scattering among them is resummed by a T-matrix.

The tunneling current at a tip is ``-Im G(tip, tip; E)`` (Tersoff-Hamann
level), and constant-current images follow by adjusting the tip height.
Lengths are in the units of the potential (angstrom in the presets).
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import interpolate, optimize

from . import _quad
from .errors import AccuracyError, DomainError, ResonanceError
from .specialfns import airy_scaled, besselj0

__all__ = [
    "ModelPotential1D", "AdatomLattice", "LateralGrid", "CorrugationMap", "GreenTables",
    "g1", "g_sym", "t_matrix", "full_green", "full_green_born", "tunneling_current",
    "corrugation_map", "build_tables", "surface_resonance", "circle_positions",
    "strength_from_phase_shift", "with_flat_level", "calibrate_flat_level",
    "WRONSKIAN_TOL", "CONDITION_LIMIT",
]

WRONSKIAN_TOL = 1e-14
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ModelPotential1D:
    """Piecewise-linear potential with an absorbing wall.

    Parameters
    ----------
    segments : sequence of (z_start, z_end, slope, offset)
        ``V(z) = offset + slope * z`` on ``z_start <= z < z_end``. Segments are
        contiguous and ordered; the first starts at ``-inf`` and the last ends
        at ``wall_z``.
    wall_z : float
    wall_height : float
        Real part of the constant potential beyond ``wall_z``.
    wall_absorption : float
        ``>= 0``; the wall potential is ``wall_height - i wall_absorption``.
    surface_state_e0 : float
        Energy of the flat well that binds the surface state.
    mass, hbar : float
    """

    segments: tuple
    wall_z: float
    wall_height: float
    wall_absorption: float = 0.0
    surface_state_e0: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        segs = tuple(tuple(float(v) for v in s) for s in self.segments)
        if not segs:
            raise DomainError("at least one segment is required")
        if segs[0][0] != -math.inf:
            raise DomainError("the first segment must start at -inf")
        for a, b in zip(segs[:-1], segs[1:]):
            if a[1] != b[0]:
                raise DomainError("segments must be contiguous")
        for s in segs:
            if not s[0] < s[1]:
                raise DomainError("segments must be ordered with z_start < z_end")
        if segs[-1][1] != self.wall_z:
            raise DomainError("the last segment must end at wall_z")
        if self.wall_absorption < 0:
            raise DomainError("wall_absorption must be >= 0")
        object.__setattr__(self, "segments", segs)

    @property
    def wall_potential(self):
        return complex(self.wall_height, -self.wall_absorption)

    def _pieces(self):
        """All segments including the wall, as (z0, z1, slope, offset)."""
        return self.segments + ((self.wall_z, math.inf, 0.0, self.wall_potential),)

    def segment_index(self, z):
        for i, (z0, z1, _, _) in enumerate(self._pieces()):
            if z0 <= z < z1:
                return i
        raise DomainError(f"z = {z} outside the potential")

    def potential(self, z):
        """``V(z)``; complex beyond the wall."""
        _, _, s, c = self._pieces()[self.segment_index(z)]
        return c + s * z

    def potential_mean(self, z):
        """Mean of the one-sided limits of ``V`` at ``z`` (differs at steps)."""
        pieces = self._pieces()
        i = self.segment_index(z)
        if i > 0 and z == pieces[i][0]:
            _, _, s, c = pieces[i - 1]
            return 0.5 * (c + s * z + self.potential(z))
        return self.potential(z)


@dataclass(frozen=True)
class AdatomLattice:
    """Adatoms at lateral positions in the ``z = 0`` plane."""

    positions: np.ndarray
    scatter_strength: complex

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        if len(p) > 1:
            d = np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1))
            d[np.diag_indices(len(p))] = np.inf
            if d.min() <= 1e-9:
                raise DomainError("adatom positions must be pairwise distinct")
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "scatter_strength", complex(self.scatter_strength))

    def __len__(self):
        return len(self.positions)


def circle_positions(n, radius, center=(0.0, 0.0)):
    """``n`` equally spaced lateral positions on a circle."""
    phi = 2 * math.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(phi), center[1] + radius * np.sin(phi)])


# ---------------------------------------------------------------------------
# one-dimensional Green function
# ---------------------------------------------------------------------------

def _csqrt_up(x):
    """Square root with non-negative imaginary part."""
    r = np.sqrt(np.asarray(x, dtype=complex))
    return np.where(r.imag < 0, -r, r)


class _Piece:
    """Local solutions of one segment at an array of energies."""

    def __init__(self, pot, seg, e):
        self.z0, self.z1, self.s, self.c = seg
        self.m2 = 2 * pot.mass / pot.hbar ** 2
        self.flat = self.s == 0.0
        if self.flat:
            self.k = _csqrt_up(self.m2 * (e - self.c))
        else:
            self.q = math.copysign(abs(self.m2 * self.s) ** (1.0 / 3.0), self.s)
            self.zoff = self.m2 * (self.c - e) / self.q ** 2

    def zeta(self, z):
        return self.q * z + self.zoff

    def scaled(self, z):
        """Scaled Airy quadruple and exponent ``xi`` at ``z``."""
        zt = self.zeta(z)
        p = airy_scaled(zt)
        xi = 2.0 / 3.0 * np.maximum(zt, 0.0) ** 1.5
        return p, xi

    def propagate(self, za, lam_a, zb):
        """Carry a solution with log-derivative ``lam_a`` at ``za`` to ``zb``.

        Returns ``(log(u(zb) / u(za)), lam_b)``.
        """
        if self.flat:
            k, d = self.k, zb - za
            kd = k * d
            grow = np.abs(kd.imag)
            small = grow < 20.0
            kd_s = np.where(small, kd, 0.0)
            c = np.cos(kd_s)
            # sin(k d) / k, finite as k -> 0
            s = d * np.sinc(kd_s / math.pi)
            u_s = c + lam_a * s
            up_s = -k * k * s + lam_a * c
            # evanescent: exponential form with exp(|Im kd|) factored out
            k_l = np.where(small, 1.0, k)
            r = lam_a / (1j * k_l)
            ep = np.exp(1j * kd - grow)
            em = np.exp(-1j * kd - grow)
            u_l = 0.5 * ((1 + r) * ep + (1 - r) * em)
            up_l = 0.5j * k_l * ((1 + r) * ep - (1 - r) * em)
            u = np.where(small, u_s, u_l)
            up = np.where(small, up_s, up_l)
            logu = np.log(u.astype(complex)) + np.where(small, 0.0, grow)
            return logu, up / u
        pa, xa = self.scaled(za)
        pb, xb = self.scaled(zb)
        q = self.q
        # coefficients in the scaled basis at za (Wronskian 1/pi)
        a = math.pi * (pa.bip - pa.bi * lam_a / q)
        b = math.pi * (lam_a / q * pa.ai - pa.aip)
        # u = a e^{-dx} Ai + b e^{dx} Bi; factor out the larger exponential
        dx = xb - xa
        ea = np.where(dx >= 0, np.exp(-2 * np.abs(dx)), 1.0)
        eb = np.where(dx >= 0, 1.0, np.exp(-2 * np.abs(dx)))
        u = a * ea * pb.ai + b * eb * pb.bi
        up = q * (a * ea * pb.aip + b * eb * pb.bip)
        return np.log(u.astype(complex)) + np.abs(dx), up / u


def _left_solution(piece, z):
    """Log of ``u_L`` (up to a constant) and its log-derivative in the first segment."""
    if piece.flat:
        k = piece.k
        return -1j * k * z, -1j * k
    p, xi = piece.scaled(z)
    q = piece.q
    if piece.s < 0:
        # Ai decays towards -inf
        return np.log(p.ai.astype(complex)) - xi, q * p.aip / p.ai
    # rising potential towards +z: outgoing Ci = Bi + i Ai towards -inf
    w = np.exp(-2 * xi)
    m = p.bi + 1j * p.ai * w
    mp = p.bip + 1j * p.aip * w
    return np.log(m) + xi, q * mp / m


def _sweep_left(pot, pieces, z):
    """``(log u_L(z), lam_L(z))`` by propagating from ``-inf`` to the right."""
    i = pot.segment_index(z)
    first = pieces[0]
    if i == 0:
        return _left_solution(first, z)
    logu, lam = _left_solution(first, first.z1)
    for j in range(1, i + 1):
        pc = pieces[j]
        target = z if j == i else pc.z1
        d_logu, lam = pc.propagate(pc.z0, lam, target)
        logu = logu + d_logu
    return logu, lam


def _sweep_right(pot, pieces, z):
    """``lam_R(z)`` by propagating from the absorbing wall to the left."""
    i = pot.segment_index(z)
    wall = pieces[-1]
    lam = 1j * wall.k * np.ones_like(wall.k)
    if i == len(pieces) - 1:
        return lam
    for j in range(len(pieces) - 2, i - 1, -1):
        pc = pieces[j]
        target = z if j == i else pc.z0
        _, lam = pc.propagate(pc.z1, lam, target)
    return lam


def g1(z, zp, e_z, pot):
    """One-dimensional Green function ``2M u_L(z<) u_R(z>) / (hbar^2 W)``.

    Parameters
    ----------
    z, zp : float
    e_z : float or array_like
        Energy of the motion along z.
    pot : ModelPotential1D

    Raises
    ------
    ResonanceError
        If the normalized Wronskian falls below :data:`WRONSKIAN_TOL`, which
        happens at a bound state of a non-absorbing potential.
    """
    e = np.atleast_1d(np.asarray(e_z, dtype=float))
    lo, hi = (z, zp) if z <= zp else (zp, z)
    pieces = [_Piece(pot, seg, e) for seg in pot._pieces()]
    logu_lo, _ = _sweep_left(pot, pieces, lo)
    logu_hi, lam_l = _sweep_left(pot, pieces, hi)
    lam_r = _sweep_right(pot, pieces, hi)
    w = lam_r - lam_l
    scale = np.abs(lam_r) + np.abs(lam_l)
    if np.any(np.abs(w) < WRONSKIAN_TOL * scale):
        raise ResonanceError("vanishing Wronskian: bound state at this energy",
                             condition=float(np.min(np.abs(w) / scale)))
    res = 2 * pot.mass / pot.hbar ** 2 * np.exp(logu_lo - logu_hi) / w
    return complex(res[0]) if np.ndim(e_z) == 0 else res


def surface_resonance(pot, e_lo=None, e_hi=None, n=4001):
    """Energy and width of the quasi-bound surface state.

    The state is located as the minimum of ``|W|`` (the pole of ``g1`` at the
    well) along the real energy axis, and the width follows from
    ``|W|^2 ~ (E - E_res)^2 + Gamma^2 / 4`` near it.

    Returns
    -------
    (float, float)
        ``E_res`` and the full width ``Gamma``.
    """
    e_lo = pot.surface_state_e0 if e_lo is None else e_lo
    e_hi = pot.wall_height if e_hi is None else e_hi
    z = 0.5 * (pot.segments[-1][0] + pot.wall_z) if math.isfinite(pot.segments[-1][0]) else pot.wall_z - 1e-3

    def inv_mag(e):
        return -np.abs(g1(z, z, e, pot))

    es = np.linspace(e_lo, e_hi, n)[1:-1]
    vals = inv_mag(es)
    i = int(np.argmin(vals))
    res = optimize.minimize_scalar(lambda x: float(inv_mag(x)), bounds=(es[max(i - 1, 0)], es[min(i + 1, len(es) - 1)]),
                                   method="bounded", options={"xatol": 1e-14})
    e0 = float(res.x)
    peak = -float(res.fun)
    # half maximum of |g1|^2, i.e. |g1| = peak / sqrt(2)
    half = peak / math.sqrt(2.0)
    f = lambda x: float(-inv_mag(x)) - half
    step = max(1e-9, 1e-6 * (e_hi - e_lo))
    right = e0 + step
    while f(right) > 0 and right < e_hi:
        step *= 2
        right = e0 + step
    try:
        r = optimize.brentq(f, e0, min(right, e_hi))
    except ValueError:
        raise AccuracyError("resonance width not resolved") from None
    return e0, 2.0 * (r - e0)


# ---------------------------------------------------------------------------
# lateral integral
# ---------------------------------------------------------------------------

def _kappa(pot, v_ref, energy, k):
    """Decay constant ``sqrt(k^2 + 2M (V_ref - E) / hbar^2)`` with ``Re >= 0``.

    Written as ``-i sqrt(...)`` with the upward root so that the reference
    wave is outgoing when the reference region is classically allowed.
    """
    return -1j * _csqrt_up(2 * pot.mass * (energy - v_ref) / pot.hbar ** 2 - k * k)


def _reference_pair(pot, z, zp, energy):
    v_ref = 0.5 * (pot.potential_mean(z) + pot.potential_mean(zp))
    return v_ref, abs(z - zp)


def _reference_1d(pot, v_ref, dz, energy, k, kappa2=None):
    """Free-like reference ``-(M / hbar^2 kappa) exp(-kappa dz)``.

    ``kappa2 = k^2 - k_s^2`` may be passed directly where ``k`` is too close
    to the singular momentum ``k_s`` to form the difference accurately.
    """
    if kappa2 is None:
        kap = _kappa(pot, v_ref, energy, k)
    else:
        kap = -1j * _csqrt_up(-np.asarray(kappa2, dtype=float))
    return -pot.mass / (pot.hbar ** 2 * kap) * np.exp(-kap * dz)


def _reference_singularity(pot, v_ref, energy):
    """Lateral momentum where the reference ``kappa`` vanishes, if any.

    When ``V_ref < E`` the reference behaves like ``1/sqrt(k_s - k)`` there;
    the singularity is integrable but has to be a quadrature breakpoint.
    """
    if energy <= v_ref:
        return None
    return math.sqrt(2 * pot.mass * (energy - v_ref)) / pot.hbar


def _reference_3d(pot, v_ref, energy, dz, rho):
    """Lateral transform of the reference: ``-(M / 2 pi hbar^2) exp(-kappa0 R) / R``.

    At ``R = 0`` the divergent ``1/R`` is dropped, leaving ``M kappa0 / 2 pi hbar^2``.
    """
    k0 = complex(_kappa(pot, v_ref, energy, 0.0))
    pref = pot.mass / (2 * math.pi * pot.hbar ** 2)
    r = math.hypot(dz, rho)
    if r == 0.0:
        return pref * k0
    return -pref * np.exp(-k0 * r) / r


def _k_breakpoints(energy, pot, res=None):
    """Lateral momenta where ``E - hbar^2 k^2 / 2M`` meets the surface resonance."""
    if res is None:
        try:
            res = surface_resonance(pot)
        except (AccuracyError, ResonanceError):
            return []
    e_res, width = res
    out = []
    for e_b in (e_res - 20 * width, e_res - 2 * width, e_res, e_res + 2 * width, e_res + 20 * width):
        if energy > e_b:
            out.append(math.sqrt(2 * pot.mass * (energy - e_b)) / pot.hbar)
    return sorted(out)


def _k_max(z, zp, energy, pot, tol=1e-12):
    """Cutoff beyond which the (subtracted) integrand is below ``tol`` of its peak."""
    v_ref, dz = _reference_pair(pot, z, zp, energy)

    def mag(k):
        return np.abs(k * (g1(z, zp, energy - pot.hbar ** 2 * k * k / (2 * pot.mass), pot)
                           - _reference_1d(pot, v_ref, dz, energy, k)))

    ks = np.geomspace(1e-3, 1e3, 241)
    k_s = _reference_singularity(pot, v_ref, energy)
    if k_s is not None:
        # keep the integrable spike of the reference out of the peak estimate
        ks = ks[np.abs(ks - k_s) > 0.05 * k_s]
    with np.errstate(divide="ignore", invalid="ignore"):
        m = mag(ks)
    m = np.where(np.isfinite(m), m, 0.0)
    peak = m.max()
    below = m < tol * peak
    # first k after which everything stays below the threshold
    idx = np.nonzero(~below)[0]
    if len(idx) == 0:
        return float(ks[1])
    last = idx[-1]
    if last == len(ks) - 1:
        raise AccuracyError("lateral integrand does not decay below 1e-12 of its peak")
    return float(ks[last + 1])


def g_sym(delta_rho, z, zp, energy, pot, epsrel=1e-8, resonance=None):
    """Green function of the adatom-free surface.

    ``(1/2 pi) int_0^inf dk k J0(k delta_rho) g1(z, zp; E - hbar^2 k^2 / 2M)``

    To make the integral absolutely convergent the free-like reference
    ``-(M / hbar^2 kappa) exp(-kappa |z - zp|)`` is subtracted under the
    integral and its exact transform ``-(M / 2 pi hbar^2) exp(-kappa0 R) / R``
    added back. At coincidence the divergent real ``1/R`` part is dropped;
    the imaginary part is exact.

    Raises
    ------
    AccuracyError
        If the integrand tail does not decay or quadrature fails.
    """
    if delta_rho < 0:
        raise DomainError("delta_rho must be >= 0")
    m, hb = pot.mass, pot.hbar
    v_ref, dz = _reference_pair(pot, z, zp, energy)
    k_max = _k_max(z, zp, energy, pot)
    bps = [k for k in _k_breakpoints(energy, pot, resonance) if k < k_max]
    k_s = _reference_singularity(pot, v_ref, energy)

    def integrand(k, kappa2=None):
        ez = energy - hb * hb * k * k / (2 * m)
        diff = g1(z, zp, ez, pot) - _reference_1d(pot, v_ref, dz, energy, k, kappa2)
        return k * besselj0(k * delta_rho) * diff / (2 * math.pi)

    n0 = int(min(400, max(16, k_max * delta_rho / math.pi)))
    if k_s is None or k_s >= k_max:
        val, _ = _quad.gk_quad(integrand, 0.0, k_max, epsabs=1e-14, epsrel=epsrel,
                               initial=n0, breakpoints=bps)
    else:
        # k = k_s -+ u^2 on either side absorbs the 1/sqrt(|k - k_s|) of the reference
        left, _ = _quad.gk_quad(lambda u: 2 * u * integrand(k_s - u * u, -u * u * (2 * k_s - u * u)),
                                0.0, math.sqrt(k_s),
                                epsabs=1e-14, epsrel=epsrel, initial=16,
                                breakpoints=[math.sqrt(k_s - b) for b in bps if b < k_s])
        right, _ = _quad.gk_quad(lambda u: 2 * u * integrand(k_s + u * u, u * u * (2 * k_s + u * u)),
                                 0.0, math.sqrt(k_max - k_s),
                                 epsabs=1e-14, epsrel=epsrel, initial=n0,
                                 breakpoints=[math.sqrt(b - k_s) for b in bps if b > k_s])
        val = left + right
    return complex(val + _reference_3d(pot, v_ref, energy, dz, delta_rho))


# ---------------------------------------------------------------------------
# adatom scattering
# ---------------------------------------------------------------------------

def _pair_distances(p):
    return np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1))


def _coupling_matrix(lat, energy, pot, gfun=None):
    """``G_jk = g_sym(|rho_j - rho_k|, 0, 0, E)`` off the diagonal, zero on it."""
    n = len(lat)
    out = np.zeros((n, n), dtype=complex)
    if n < 2:
        return out
    d = _pair_distances(lat.positions)
    if gfun is None:
        res = _safe_resonance(pot)
        cache = {}

        def gfun(r):
            key = round(r, 12)
            if key not in cache:
                cache[key] = g_sym(r, 0.0, 0.0, energy, pot, resonance=res)
            return cache[key]
    iu = np.triu_indices(n, 1)
    vals = np.array([gfun(r) for r in d[iu]])
    out[iu] = vals
    out[(iu[1], iu[0])] = vals
    return out


def _safe_resonance(pot):
    try:
        return surface_resonance(pot)
    except (AccuracyError, ResonanceError):
        return None


def _t_from_coupling(lat, coupling):
    n = len(lat)
    mat = np.eye(n, dtype=complex) / lat.scatter_strength - coupling
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ResonanceError("multiple-scattering matrix is ill conditioned", condition=float(cond))
    return np.linalg.inv(mat)


def t_matrix(lat, energy, pot):
    """Multiple-scattering T-matrix ``M^{-1}``, ``M = I / t0 - G_offdiag``.

    Raises
    ------
    ResonanceError
        If ``M`` has condition number above :data:`CONDITION_LIMIT`; the
        estimate is attached as ``condition``.
    """
    if lat.scatter_strength == 0:
        raise DomainError("scatter_strength must be non-zero")
    if len(lat) == 0:
        return np.zeros((0, 0), dtype=complex)
    return _t_from_coupling(lat, _coupling_matrix(lat, energy, pot))


def _to_adatoms(r, lat, energy, pot, res):
    r = np.asarray(r, dtype=float)
    d = np.sqrt(((lat.positions - r[:2]) ** 2).sum(-1))
    return np.array([g_sym(x, r[2], 0.0, energy, pot, resonance=res) for x in d])


def full_green(r, rp, energy, lat, pot, tmat=None):
    """``G = G_sym(r, r') + sum_jk G_sym(r, r_j) T_jk G_sym(r_k, r')``."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    res = _safe_resonance(pot)
    g0 = g_sym(float(np.hypot(*(r[:2] - rp[:2]))), r[2], rp[2], energy, pot, resonance=res)
    if len(lat) == 0:
        return g0
    t = t_matrix(lat, energy, pot) if tmat is None else tmat
    a = _to_adatoms(r, lat, energy, pot, res)
    b = a if np.array_equal(r, rp) else _to_adatoms(rp, lat, energy, pot, res)
    return complex(g0 + a @ t @ b)


def full_green_born(r, rp, energy, lat, pot, order=2):
    """Born series of :func:`full_green` to the given order in ``t0``.

    ``T ~ t0 I + t0^2 G_offdiag + ...``; used to check the resummation at
    weak coupling.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    res = _safe_resonance(pot)
    g0 = g_sym(float(np.hypot(*(r[:2] - rp[:2]))), r[2], rp[2], energy, pot, resonance=res)
    if len(lat) == 0:
        return g0
    t0 = lat.scatter_strength
    c = _coupling_matrix(lat, energy, pot)
    t = np.zeros_like(c)
    term = t0 * np.eye(len(lat), dtype=complex)
    for _ in range(order):
        t = t + term
        term = t0 * c @ term
    a = _to_adatoms(r, lat, energy, pot, res)
    b = _to_adatoms(rp, lat, energy, pot, res)
    return complex(g0 + a @ t @ b)


def tunneling_current(tip, energy, lat, pot, tmat=None):
    """Current ``-Im G(tip, tip; E)``, in units of the local density of states."""
    tip = np.asarray(tip, dtype=float)
    if pot.segment_index(tip[2]) != 0:
        raise DomainError("tip must be in the vacuum region (first segment)")
    return -full_green(tip, tip, energy, lat, pot, tmat=tmat).imag


# ---------------------------------------------------------------------------
# constant-current maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LateralGrid:
    """Rectangular grid of lateral tip positions."""

    x_min: float
    x_max: float
    nx: int
    y_min: float
    y_max: float
    ny: int

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self):
        return np.linspace(self.y_min, self.y_max, self.ny)


@dataclass
class CorrugationMap:
    """Tip heights ``-z`` (above the adatom plane) on a lateral grid.

    ``flagged`` marks points where the target current was out of reach or
    the current was not monotone in the tip height; their height is NaN.
    """

    x: np.ndarray
    y: np.ndarray
    height: np.ndarray
    flagged: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def corrugation(self):
        """Peak-to-peak height variation over the unflagged points."""
        h = self.height[~self.flagged]
        return float(h.max() - h.min()) if h.size else float("nan")


@dataclass
class GreenTables:
    """Interpolation tables of the adatom-free Green function at one energy.

    ``tip_adatom`` holds ``G_sym(tip at z, adatom at distance rho)`` on the
    ``(z, rho)`` grid; ``tip_tip`` holds ``G_sym(tip, tip)`` on the ``z`` grid.
    """

    z: np.ndarray
    rho: np.ndarray
    tip_adatom: np.ndarray
    tip_tip: np.ndarray
    adatom_adatom: object = None

    def __post_init__(self):
        kw = dict(kx=3, ky=3)
        self._re = interpolate.RectBivariateSpline(self.z, self.rho, self.tip_adatom.real, **kw)
        self._im = interpolate.RectBivariateSpline(self.z, self.rho, self.tip_adatom.imag, **kw)
        self._bg_re = interpolate.CubicSpline(self.z, self.tip_tip.real)
        self._bg_im = interpolate.CubicSpline(self.z, self.tip_tip.imag)

    def to_adatom(self, z, rho):
        return self._re.ev(z, rho) + 1j * self._im.ev(z, rho)

    def background(self, z):
        return self._bg_re(z) + 1j * self._bg_im(z)


def _k_nodes(energy, pot, k_max, panel=0.05, order=16, res=None):
    """Fixed Gauss-Legendre panels on ``[0, k_max]``, refined at the resonance."""
    edges = set(np.linspace(0.0, k_max, int(math.ceil(k_max / panel)) + 1).tolist())
    bps = [k for k in _k_breakpoints(energy, pot, res) if k < k_max]
    for k in bps:
        edges.add(k)
    if len(bps) >= 3:
        # fine panels across the central part of the resonance
        lo, hi = bps[1], bps[-2]
        edges.update(np.linspace(lo, hi, 65).tolist())
    edges = np.array(sorted(edges))
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def build_tables(energy, pot, z_bounds, rho_max, nz=41, drho=0.1, k_max=None, workers=None):
    """Tabulate ``G_sym`` between tip heights and the adatom plane.

    Parameters
    ----------
    z_bounds : (float, float)
        Range of tip coordinates ``z`` (negative, in the vacuum).
    rho_max : float
        Largest lateral tip-adatom distance needed.
    workers : concurrent.futures.Executor, optional
        Used to evaluate the tip heights concurrently.
    """
    z_lo, z_hi = sorted(z_bounds)
    if z_hi >= 0:
        raise DomainError("tip heights must lie in the vacuum (z < 0)")
    res = _safe_resonance(pot)
    if k_max is None:
        k_max = max(_k_max(z_hi, 0.0, energy, pot), _k_max(z_hi, z_hi, energy, pot))
    k, w = _k_nodes(energy, pot, k_max, res=res)
    ez = energy - pot.hbar ** 2 * k * k / (2 * pot.mass)
    zs = np.linspace(z_lo, z_hi, nz)
    rho = np.arange(0.0, rho_max + 3 * drho, drho)
    jmat = besselj0(np.outer(k, rho))

    def row(z):
        g_ta = g1(z, 0.0, ez, pot)
        ta = (w * k * g_ta / (2 * math.pi)) @ jmat
        v_ref, dz = _reference_pair(pot, z, z, energy)
        diff = g1(z, z, ez, pot) - _reference_1d(pot, v_ref, dz, energy, k)
        tt = np.sum(w * k * diff) / (2 * math.pi) + _reference_3d(pot, v_ref, energy, 0.0, 0.0)
        return ta, tt

    rows = list(workers.map(row, zs)) if workers is not None else [row(z) for z in zs]
    ta = np.array([r[0] for r in rows])
    tt = np.array([r[1] for r in rows])
    return GreenTables(z=zs, rho=rho, tip_adatom=ta, tip_tip=tt)


def _map_currents(z, pts, lat, tmat, tables):
    """Currents for tips at lateral ``pts`` (N, 2) and heights ``z`` (N,)."""
    bg = tables.background(z)
    if len(lat) == 0:
        return -bg.imag
    d = np.sqrt(((pts[:, None, :] - lat.positions[None, :, :]) ** 2).sum(-1))
    zz = np.broadcast_to(z[:, None], d.shape)
    g = tables.to_adatom(zz.ravel(), d.ravel()).reshape(d.shape)
    return -(bg + np.einsum("ij,jk,ik->i", g, tmat, g)).imag


def corrugation_map(grid, j_target, energy, lat, pot, z_bounds, tables=None, tmat=None,
                    tol=1e-4, workers=None):
    """Constant-current image: the tip height at which ``J = j_target``.

    Each grid point is solved by bisection in ``z`` to ``tol`` times the
    width of ``z_bounds``. Before that, ``J`` is checked to decrease with
    height along the table nodes; points where it does not, or where the
    target lies outside ``[J(far), J(near)]``, are flagged.

    Parameters
    ----------
    grid : LateralGrid
    z_bounds : (float, float)
        Tip coordinates; the tip height is ``-z``.
    tables : GreenTables, optional
        Reused when given (they depend only on energy and potential).
    """
    z_near, z_far = max(z_bounds), min(z_bounds)
    xs, ys = grid.x, grid.y
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    if tables is None:
        if len(lat):
            far = np.sqrt(((pts[:, None, :] - lat.positions[None, :, :]) ** 2).sum(-1)).max()
        else:
            far = 1.0
        tables = build_tables(energy, pot, (z_far, z_near), far, workers=workers)
    if tmat is None:
        tmat = t_matrix(lat, energy, pot) if len(lat) else np.zeros((0, 0))
    n = len(pts)
    # monotonicity along the table nodes, nearest to farthest
    zn = tables.z[::-1]
    cur = np.array([_map_currents(np.full(n, zz), pts, lat, tmat, tables) for zz in zn])
    mono = np.all(np.diff(cur, axis=0) < 0, axis=0)
    j_near, j_far = cur[0], cur[-1]
    ok = mono & (j_far <= j_target) & (j_target <= j_near)
    lo = np.full(n, z_far)   # current below target
    hi = np.full(n, z_near)  # current above target
    width = z_near - z_far
    while np.max(hi - lo) > tol * width:
        mid = 0.5 * (lo + hi)
        j = _map_currents(mid, pts, lat, tmat, tables)
        above = j > j_target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    z = 0.5 * (lo + hi)
    height = np.where(ok, -z, np.nan).reshape(X.shape)
    return CorrugationMap(x=xs, y=ys, height=height, flagged=~ok.reshape(X.shape),
                          meta={"energy": energy, "j_target": j_target, "z_bounds": [z_far, z_near],
                                "n_adatoms": len(lat)})


# ---------------------------------------------------------------------------
# calibration helpers
# ---------------------------------------------------------------------------

def strength_from_phase_shift(delta, energy, pot):
    """Adatom strength ``t0 = -exp(i delta) sin(delta) / |Im G_sym(0, 0; E)|``.

    An s-wave phase shift ``delta`` gives a lossless scatterer: then
    ``Im(1/t0) = -Im G_sym(0, 0; E)`` exactly, so the adatom neither
    creates nor destroys electrons. ``delta = pi/2`` is the unitary limit.
    """
    im = g_sym(0.0, 0.0, 0.0, energy, pot).imag
    if im >= 0:
        raise DomainError("no surface density of states at this energy")
    return complex(-np.exp(1j * delta) * math.sin(delta) / abs(im))


def with_flat_level(pot, e0):
    """Copy of ``pot`` with its surface-state well moved to ``e0``."""
    segs = []
    for z0, z1, s, c in pot.segments:
        if s == 0.0 and c == pot.surface_state_e0:
            c = e0
        segs.append((z0, z1, s, c))
    return ModelPotential1D(segments=segs, wall_z=pot.wall_z, wall_height=pot.wall_height,
                            wall_absorption=pot.wall_absorption, surface_state_e0=e0,
                            mass=pot.mass, hbar=pot.hbar)


def calibrate_flat_level(pot, target, bracket):
    """Flat-well level that puts the surface resonance at ``target``.

    Parameters
    ----------
    bracket : (float, float)
        Interval of well levels known to contain the solution.
    """
    def f(e0):
        return surface_resonance(with_flat_level(pot, e0))[0] - target
    e0 = optimize.brentq(f, *bracket, xtol=1e-14)
    return with_flat_level(pot, e0)
