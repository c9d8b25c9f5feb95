"""Green functions and propagators for ballistic quantum motion.

Closed-form and numerically controlled Green functions for free motion,
uniform force fields and crossed electric and magnetic fields, together
with their applications: source currents and threshold laws, the shutter
problem, the atom laser, STM images of adatom structures, the density of
states and Hall resistivity in crossed fields, and closed-orbit theory.
"""
__version__ = "0.1.0"

from .errors import (AccuracyError, BallisticError, ContractError, DegeneracyError, DomainError,
                     RangeError, ResonanceError, SingularityError)
from .propagator import FieldConfig
from .units import UnitSystem, convert_units

__all__ = [
    "__version__", "FieldConfig", "UnitSystem", "convert_units",
    "BallisticError", "DomainError", "RangeError", "SingularityError", "AccuracyError",
    "ResonanceError", "DegeneracyError", "ContractError",
]
