"""Conversion between SI inputs and the natural units used by the library.

Natural units set ``hbar = m = e = 1`` together with a chosen length unit
``L0``. Every other scale follows:

    energy  E0 = hbar^2 / (m L0^2)      time   T0 = hbar / E0
    force   F0 = E0 / L0                field  Ef0 = E0 / (e L0)
    magnetic field B0 = hbar / (e L0^2)

With these, the Larmor frequency of a field ``B`` (in units of B0) is
``omega_L = B / 2`` and an electric field ``Ef`` exerts the force ``F = Ef``.
"""
from dataclasses import dataclass

from .errors import DomainError

__all__ = ["UnitSystem", "convert_units", "HBAR_SI", "ELECTRON_MASS_SI", "ELEMENTARY_CHARGE_SI",
           "ATOMIC_MASS_UNIT_SI", "ELECTRON_VOLT_SI", "PLANCK_SI"]

HBAR_SI = 1.054571817e-34
PLANCK_SI = 6.62607015e-34
ELECTRON_MASS_SI = 9.1093837015e-31
ELEMENTARY_CHARGE_SI = 1.602176634e-19
ATOMIC_MASS_UNIT_SI = 1.66053906660e-27
ELECTRON_VOLT_SI = 1.602176634e-19


@dataclass(frozen=True)
class UnitSystem:
    """Scale factors from SI to natural units.

    Parameters
    ----------
    mass_si : float
        Particle mass in kg.
    hbar_si : float
    charge_si : float
        Particle charge magnitude in C.
    length_si : float
        Length unit ``L0`` in m.
    """

    mass_si: float = ELECTRON_MASS_SI
    hbar_si: float = HBAR_SI
    charge_si: float = ELEMENTARY_CHARGE_SI
    length_si: float = 1e-8

    def __post_init__(self):
        for name in ("mass_si", "hbar_si", "charge_si", "length_si"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def energy(self):
        return self.hbar_si ** 2 / (self.mass_si * self.length_si ** 2)

    @property
    def time(self):
        return self.hbar_si / self.energy

    @property
    def force(self):
        return self.energy / self.length_si

    @property
    def field(self):
        return self.energy / (self.charge_si * self.length_si)

    @property
    def magnetic_field(self):
        return self.hbar_si / (self.charge_si * self.length_si ** 2)

    def scale(self, quantity):
        """SI value of one natural unit of ``quantity``."""
        table = {
            "energy": self.energy,
            "length": self.length_si,
            "time": self.time,
            "field": self.field,
            "force": self.force,
            "magnetic_field": self.magnetic_field,
        }
        try:
            return table[quantity]
        except KeyError:
            raise DomainError(f"unknown quantity kind {quantity!r}; expected one of {sorted(table)}") from None


def convert_units(value, quantity, direction, us):
    """Convert ``value`` between SI and natural units.

    Parameters
    ----------
    quantity : {"energy", "length", "time", "field", "force", "magnetic_field"}
    direction : {"si_to_natural", "natural_to_si"}
    us : UnitSystem
    """
    s = us.scale(quantity)
    if direction == "si_to_natural":
        return value / s
    if direction == "natural_to_si":
        return value * s
    raise DomainError(f"unknown direction {direction!r}")
