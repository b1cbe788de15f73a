from dataclasses import dataclass, fields

from .errors import DomainError

# 1 atm in Pa; HITRAN broadening/shift coefficients are quoted per atm.
ATM = 101325.0


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values plus the HITRAN reference state."""

    speed_of_light: float = 299792458.0
    planck: float = 6.62607015e-34
    boltzmann: float = 1.380649e-23
    gas_constant: float = 8.314462618
    avogadro: float = 6.02214076e23
    reference_pressure: float = ATM
    reference_temperature: float = 296.0
    stp_temperature: float = 273.15

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise DomainError(f"{f.name} must be strictly positive, got {value!r}")

    @property
    def c(self):
        return self.speed_of_light


DEFAULT = PhysicalConstants()
