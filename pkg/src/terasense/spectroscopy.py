"""Reflection and transmission models and their inversions to optical constants.

All functions accept scalars or NumPy arrays and broadcast.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT
from .errors import DomainError, InconsistentMeasurementError, SingularMeasurementError

C = DEFAULT.speed_of_light
SINGULAR_TOL = 1e-12


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


@dataclass(frozen=True)
class OpticalConstants:
    """Complex refractive index n + j*chi, optionally tied to a frequency."""

    refractive_index: object
    extinction: object
    frequency: object = None
    absorption_coefficient: object = None

    @property
    def n(self):
        return self.refractive_index

    @property
    def chi(self):
        return self.extinction

    @property
    def absorption(self):
        """Absorption coefficient in 1/m (stored value, else derived from chi)."""
        if self.absorption_coefficient is not None:
            return self.absorption_coefficient
        if self.frequency is None:
            raise DomainError("absorption coefficient needs a frequency")
        return absorption_from_extinction(self.frequency, self.extinction)


@dataclass(frozen=True)
class ReflectionMeasurement:
    reflectance: float
    phase_shift: float
    incidence_angle: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.reflectance <= 1.0:
            raise DomainError(f"reflectance must be in [0, 1], got {self.reflectance}")

    @property
    def reflection_coefficient(self):
        return math.sqrt(self.reflectance)

    @property
    def complex_reflectivity(self):
        return self.reflection_coefficient * complex(math.cos(self.phase_shift), math.sin(self.phase_shift))


@dataclass(frozen=True)
class TransmissionMeasurement:
    transmittance: float
    phase_difference: float
    thickness: float
    frequency: float

    def __post_init__(self):
        if not self.transmittance > 0:
            raise DomainError(f"transmittance magnitude must be > 0, got {self.transmittance}")
        if not self.thickness > 0:
            raise DomainError(f"thickness must be > 0, got {self.thickness}")


def fresnel_oblique(n_i, theta_i, n_r=1.0):
    """s- and p-polarised reflectivities plus the refraction angle.

    ``n_i`` is the (complex) index on the incidence side and ``n_r`` the
    index of the other medium, with ``n_i sin(theta_i) = n_r sin(theta_r)``.
    Past the critical angle ``theta_r`` is complex and both reflectivities
    have unit magnitude.
    """
    theta_i = np.asarray(theta_i, dtype=np.float64)
    if np.any(theta_i < 0) or np.any(theta_i >= math.pi / 2):
        raise DomainError("incidence angle must lie in [0, pi/2)")
    n_i = np.asarray(n_i, dtype=np.complex128)
    cos_i = np.cos(theta_i)
    sin_r = n_i * np.sin(theta_i) / n_r
    cos_r = np.sqrt(1.0 - sin_r * sin_r + 0j)
    r_s = (n_i * cos_i - n_r * cos_r) / (n_r * cos_r + n_i * cos_i)
    r_p = (n_i * cos_r - n_r * cos_i) / (n_r * cos_i + n_i * cos_r)
    theta_r = np.arcsin(sin_r)
    if np.all(np.abs(np.imag(theta_r)) == 0):
        theta_r = np.real(theta_r)
    return _out(r_s), _out(r_p), _out(theta_r)


def fresnel_normal(n, chi):
    """Normal-incidence reflection: returns (|r|, R, phase)."""
    n = np.asarray(n, dtype=np.float64)
    chi = np.asarray(chi, dtype=np.float64)
    if np.any(n <= 0) or np.any(chi < 0):
        raise DomainError("need n > 0 and chi >= 0")
    r = ((n - 1.0) + 1j * chi) / ((n + 1.0) + 1j * chi)
    mag = np.abs(r)
    return _out(mag), _out(mag * mag), _out(np.angle(r))


def invert_reflection(R, phi):
    """Optical constants from normal-incidence reflectance and phase.

    Exact algebraic inverse of :func:`fresnel_normal`.
    """
    R = np.asarray(R, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    if np.any(R < 0) or np.any(R >= 1):
        raise DomainError("reflectance must lie in [0, 1)")
    rho = np.sqrt(R)
    den = 1.0 + R - 2.0 * rho * np.cos(phi)
    if np.any(np.abs(den) < SINGULAR_TOL):
        raise SingularMeasurementError("reflection inversion denominator vanishes")
    n = (1.0 - R) / den
    chi = 2.0 * rho * np.sin(phi) / den
    return OpticalConstants(_out(n), _out(chi))


def absorption_from_extinction(f, chi):
    """K = 4 pi f chi / c, in 1/m."""
    f = np.asarray(f, dtype=np.float64)
    chi = np.asarray(chi, dtype=np.float64)
    if np.any(f <= 0) or np.any(chi < 0):
        raise DomainError("need f > 0 and chi >= 0")
    return _out(4.0 * math.pi * f * chi / C)


def transmission_forward(n, chi, d, f):
    """Complex single-pass transmittance of a slab of thickness ``d`` in air."""
    n = np.asarray(n, dtype=np.float64)
    chi = np.asarray(chi, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if np.any(n <= 0) or np.any(chi < 0) or np.any(d <= 0) or np.any(f <= 0):
        raise DomainError("need n > 0, chi >= 0, d > 0, f > 0")
    n_complex = n + 1j * chi
    return _out(4.0 * n / (1.0 + n) ** 2 * np.exp(2j * math.pi * f * (n_complex - 1.0) * d / C))


def invert_transmission(T_mag, phi, d, f, clamp_tol=1e-12):
    """Refractive index, extinction and absorption from |T| and unwrapped phase.

    When |T| exceeds the lossless Fresnel factor the implied extinction is
    negative; it is clamped to zero with a ``RuntimeWarning``.
    """
    T_mag = np.asarray(T_mag, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if np.any(T_mag <= 0) or np.any(d <= 0) or np.any(f <= 0):
        raise DomainError("need |T| > 0, d > 0, f > 0")
    n = C * phi / (2.0 * math.pi * d * f) + 1.0
    if np.any(n <= 0):
        raise InconsistentMeasurementError("phase implies a non-positive refractive index")
    log_term = np.log(4.0 * n / (T_mag * (1.0 + n) ** 2))
    chi = C / (2.0 * math.pi * d * f) * log_term
    K = 2.0 / d * log_term
    fresnel = 4.0 * n / (1.0 + n) ** 2
    over = T_mag > fresnel * (1.0 + clamp_tol)
    if np.any(over):
        warnings.warn(
            f"{int(np.count_nonzero(over))} transmittance value(s) exceed the lossless limit; "
            "extinction clamped to 0",
            RuntimeWarning,
            stacklevel=2,
        )
    chi = np.where(chi < 0, 0.0, chi)
    K = np.where(K < 0, 0.0, K)
    return OpticalConstants(_out(n), _out(chi), _out(f), _out(K))


def unwrap_phase(freqs, phases):
    """Continue wrapped phases along ascending frequency.

    Each step picks the 2*pi multiple nearest to the previous value; the
    global offset is then chosen so a straight line through the first few
    points passes closest to zero phase at zero frequency.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    phases = np.unwrap(np.asarray(phases, dtype=np.float64))
    if freqs.size >= 2:
        k = min(freqs.size, 5)
        _, intercept = np.polyfit(freqs[:k], phases[:k], 1)
        phases = phases - 2.0 * math.pi * round(intercept / (2.0 * math.pi))
    return phases


def invert_transmission_spectrum(freqs, T, d):
    """Invert a complex transmittance sampled on ascending ``freqs``."""
    freqs = np.asarray(freqs, dtype=np.float64)
    T = np.asarray(T)
    phi = unwrap_phase(freqs, np.angle(T))
    return invert_transmission(np.abs(T), phi, d, freqs)
