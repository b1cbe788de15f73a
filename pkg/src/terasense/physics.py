"""Line-by-line molecular absorption and line-of-sight path gain.

Units are SI throughout: Hz, Pa, K, m. HITRAN fields are converted when a
``.par`` record is parsed, except the line intensity which is kept in the
database's native cm^-1/(molecule cm^-2) and converted inside
:func:`absorption_cross_section`.

The Van Vleck-Weisskopf profile used here is area-normalised in Hz^-1, so a
line's cross section integrates (over frequency) to its intensity expressed
in m^2 Hz. The printed form of this profile carries ``c`` and ``100``
prefactors that only make sense when intensities are per wavenumber; those
constants are absorbed into :data:`INTENSITY_TO_SI` instead.
"""

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import kernels
from .constants import ATM, DEFAULT
from .errors import DomainError, FormatError

C = DEFAULT.speed_of_light
WAVENUMBER_TO_HZ = 100.0 * C
# cm^-1/atm -> Hz/Pa
BROADENING_TO_SI = WAVENUMBER_TO_HZ / ATM
# cm^-1/(molecule cm^-2) -> m^2 Hz per molecule
INTENSITY_TO_SI = 1e-4 * WAVENUMBER_TO_HZ

DEFAULT_WING_CUTOFF = 25.0

PAR_RECORD_LENGTH = 160
_MIN_RECORD_LENGTH = 67


@dataclass(frozen=True)
class LineRecord:
    """One transition of one isotopologue.

    ``strength`` stays in HITRAN units; broadening and shift are in Hz/Pa.
    """

    molecule_id: int
    isotopologue_id: int
    resonance: float
    strength: float
    air_broadening: float
    self_broadening: float
    temperature_exponent: float = 0.0
    pressure_shift: float = 0.0

    def __post_init__(self):
        if not self.resonance > 0:
            raise DomainError(f"resonance must be > 0 Hz, got {self.resonance}")
        if not self.strength >= 0:
            raise DomainError(f"strength must be >= 0, got {self.strength}")
        if not self.air_broadening > 0:
            raise DomainError(f"air broadening must be > 0, got {self.air_broadening}")
        if not self.self_broadening > 0:
            raise DomainError(f"self broadening must be > 0, got {self.self_broadening}")


@dataclass(frozen=True)
class GasSpecies:
    """A gas with per-isotopologue mixing ratios.

    HITRAN intensities already include natural isotopic abundance, so the
    usual setup gives every isotopologue the species' volume mixing ratio
    (see :meth:`with_ratio`). Lines whose isotopologue has no entry in
    ``mixing`` do not contribute.
    """

    name: str
    mixing: dict
    lines: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "mixing", {int(k): float(v) for k, v in self.mixing.items()})
        for iso, q in self.mixing.items():
            if not 0.0 <= q <= 1.0:
                raise DomainError(f"{self.name}: mixing ratio of isotopologue {iso} must be in [0, 1], got {q}")

    @classmethod
    def with_ratio(cls, name, ratio, lines, isotopologues=None):
        lines = tuple(lines)
        if isotopologues is None:
            isotopologues = sorted({ln.isotopologue_id for ln in lines}) or [1]
        return cls(name, {iso: ratio for iso in isotopologues}, lines)

    @property
    def ratio(self):
        """Volume mixing ratio of the species (largest isotopologue entry)."""
        return max(self.mixing.values(), default=0.0)

    def scaled(self, factor):
        return GasSpecies(self.name, {k: v * factor for k, v in self.mixing.items()}, self.lines)


@dataclass(frozen=True)
class MediumState:
    species: tuple
    pressure: float = ATM
    temperature: float = 296.0
    path_length: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        if not self.pressure > 0:
            raise DomainError(f"pressure must be > 0 Pa, got {self.pressure}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0 K, got {self.temperature}")
        if not self.path_length > 0:
            raise DomainError(f"path length must be > 0 m, got {self.path_length}")
        total = sum(s.ratio for s in self.species)
        if total > 1.0 + 1e-9:
            raise DomainError(f"species mixing ratios sum to {total:.6g} > 1")

    def replace(self, **changes):
        kw = dict(species=self.species, pressure=self.pressure,
                  temperature=self.temperature, path_length=self.path_length)
        kw.update(changes)
        return MediumState(**kw)


def _readonly(values):
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpectralGrid:
    frequencies: np.ndarray

    def __post_init__(self):
        f = _readonly(self.frequencies).ravel()
        if f.size == 0:
            raise DomainError("grid must contain at least one frequency")
        if not np.all(f > 0):
            raise DomainError("grid frequencies must be > 0")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise DomainError("grid frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", f)

    @classmethod
    def linspace(cls, start, stop, num):
        return cls(np.linspace(start, stop, int(num)))

    def __len__(self):
        return self.frequencies.size


class SpectrumKind(str, Enum):
    TRANSMITTANCE = "transmittance"
    ABSORPTION_COEFFICIENT = "absorption_coefficient"
    PATH_GAIN_MAGNITUDE = "path_gain_magnitude"


@dataclass(frozen=True)
class Spectrum:
    grid: SpectralGrid
    values: np.ndarray
    kind: SpectrumKind = SpectrumKind.TRANSMITTANCE

    def __post_init__(self):
        v = _readonly(self.values).ravel()
        if v.size != len(self.grid):
            raise DomainError(f"{v.size} values for a grid of {len(self.grid)} points")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", SpectrumKind(self.kind))

    @property
    def frequencies(self):
        return self.grid.frequencies


# --------------------------------------------------------------------------
# HITRAN .par records

# (name, first column, last column), 1-indexed inclusive.
PAR_FIELDS = (
    ("molecule", 1, 2),
    ("isotopologue", 3, 3),
    ("wavenumber", 4, 15),
    ("intensity", 16, 25),
    ("einstein_a", 26, 35),
    ("gamma_air", 36, 40),
    ("gamma_self", 41, 45),
    ("lower_energy", 46, 55),
    ("n_air", 56, 59),
    ("delta_air", 60, 67),
)
_SPAN = {name: (lo - 1, hi) for name, lo, hi in PAR_FIELDS}


def _isotopologue(text):
    text = text.strip()
    if len(text) != 1:
        raise ValueError(text)
    if text.isdigit():
        return 10 if text == "0" else int(text)
    if text.isalpha():
        return 11 + ord(text.upper()) - ord("A")
    raise ValueError(text)


def _field(record, name, lineno, conv=float):
    lo, hi = _SPAN[name]
    raw = record[lo:hi]
    try:
        return conv(raw)
    except ValueError:
        raise FormatError(f"cannot parse {raw!r}", line=lineno, field=name) from None


def parse_hitran(par_text):
    """Decode HITRAN 2004 160-character records into :class:`LineRecord` objects.

    Blank lines are skipped. Einstein-A and lower-state energy are read for
    validation but not kept.
    """
    out = []
    for lineno, record in enumerate(par_text.splitlines(), start=1):
        if not record.strip():
            continue
        if len(record) < _MIN_RECORD_LENGTH:
            raise FormatError(
                f"record has {len(record)} characters, need at least {_MIN_RECORD_LENGTH}",
                line=lineno,
            )
        mol = _field(record, "molecule", lineno, int)
        iso = _field(record, "isotopologue", lineno, _isotopologue)
        nu = _field(record, "wavenumber", lineno)
        s = _field(record, "intensity", lineno)
        _field(record, "einstein_a", lineno)
        g_air = _field(record, "gamma_air", lineno)
        g_self = _field(record, "gamma_self", lineno)
        _field(record, "lower_energy", lineno)
        n_air = _field(record, "n_air", lineno)
        d_air = _field(record, "delta_air", lineno)
        try:
            out.append(LineRecord(
                molecule_id=mol,
                isotopologue_id=iso,
                resonance=nu * WAVENUMBER_TO_HZ,
                strength=s,
                air_broadening=g_air * BROADENING_TO_SI,
                self_broadening=g_self * BROADENING_TO_SI,
                temperature_exponent=n_air,
                pressure_shift=d_air * BROADENING_TO_SI,
            ))
        except DomainError as exc:
            raise FormatError(str(exc), line=lineno) from None
    return out


def read_par(path):
    return parse_hitran(Path(path).read_text())


def _fixed(value, width, decimals):
    """Fortran-style Fw.d: drop the leading zero when the value would overflow."""
    text = f"{value:{width}.{decimals}f}"
    if len(text) > width:
        text = text.replace("0.", ".", 1)
    if len(text) > width:
        raise FormatError(f"{value!r} does not fit F{width}.{decimals}")
    return text.rjust(width)


def _sci(value, width, decimals):
    text = f"{value:{width}.{decimals}E}"
    if len(text) > width:
        raise FormatError(f"{value!r} does not fit E{width}.{decimals}")
    return text


def format_hitran_record(line, einstein_a=0.0, lower_energy=0.0):
    """Inverse of :func:`parse_hitran` for one record, padded to 160 columns."""
    iso = line.isotopologue_id
    iso_text = "0" if iso == 10 else (str(iso) if iso < 10 else chr(ord("A") + iso - 11))
    parts = [
        f"{line.molecule_id:2d}",
        iso_text,
        _fixed(line.resonance / WAVENUMBER_TO_HZ, 12, 6),
        _sci(line.strength, 10, 3),
        _sci(einstein_a, 10, 3),
        _fixed(line.air_broadening / BROADENING_TO_SI, 5, 4),
        _fixed(line.self_broadening / BROADENING_TO_SI, 5, 3),
        _fixed(lower_energy, 10, 4),
        _fixed(line.temperature_exponent, 4, 2),
        _fixed(line.pressure_shift / BROADENING_TO_SI, 8, 6),
    ]
    return "".join(parts).ljust(PAR_RECORD_LENGTH)


# --------------------------------------------------------------------------
# Line physics


def _check_state(p, t):
    if not p > 0:
        raise DomainError(f"pressure must be > 0, got {p}")
    if not t > 0:
        raise DomainError(f"temperature must be > 0, got {t}")


def lorentz_halfwidth(line, q, p, t, consts=DEFAULT):
    """Pressure- and temperature-scaled Lorentz half-width in Hz."""
    _check_state(p, t)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"mixing ratio must be in [0, 1], got {q}")
    p0 = consts.reference_pressure
    # coefficients are per Pa; multiplying by p0 gives the half-width at p0
    w_ref = ((1.0 - q) * line.air_broadening + q * line.self_broadening) * p0
    return w_ref * (p / p0) * (consts.reference_temperature / t) ** line.temperature_exponent


def shifted_resonance(line, p):
    """Centre frequency under pressure ``p`` (shift coefficient is per Pa)."""
    return line.resonance + line.pressure_shift * p


def vvw_lineshape(f, f_c, w_L):
    """Area-normalised Van Vleck-Weisskopf profile, Hz^-1."""
    f = np.asarray(f, dtype=np.float64)
    w2 = w_L * w_L
    val = (w_L * f / (math.pi * f_c)) * (1.0 / ((f - f_c) ** 2 + w2) + 1.0 / ((f + f_c) ** 2 + w2))
    return float(val) if val.ndim == 0 else val


def _beta(t, consts):
    # hf/(2kT) with f in Hz
    return consts.planck / (2.0 * consts.boltzmann * t)


def absorption_cross_section(f, line, f_c, w_L, t, consts=DEFAULT):
    """Cross section in m^2 of one line at frequency ``f``."""
    f = np.asarray(f, dtype=np.float64)
    beta = _beta(t, consts)
    sigma = (vvw_lineshape(f, f_c, w_L) * line.strength * INTENSITY_TO_SI
             * (f / f_c) * np.tanh(beta * f) / math.tanh(beta * f_c))
    return float(sigma) if np.ndim(sigma) == 0 else sigma


def number_density_factor(q, p, t, consts=DEFAULT):
    """Prefactor turning a cross section (m^2) into an absorption coefficient (1/m)."""
    p0 = consts.reference_pressure
    return (p / p0) * (consts.stp_temperature / t) * (p / (consts.gas_constant * t)) * q * consts.avogadro


def line_table(medium, consts=DEFAULT, wing_cutoff=DEFAULT_WING_CUTOFF):
    """Per-line (centre, half-width, amplitude, cutoff) arrays for the kernel."""
    p, t = medium.pressure, medium.temperature
    centers, widths, amps, cuts = [], [], [], []
    scale = max(1.0, p / consts.reference_pressure)
    for sp in medium.species:
        for ln in sp.lines:
            q = sp.mixing.get(ln.isotopologue_id, 0.0)
            if q == 0.0 or ln.strength == 0.0:
                continue
            w = lorentz_halfwidth(ln, q, p, t, consts)
            centers.append(shifted_resonance(ln, p))
            widths.append(w)
            amps.append(number_density_factor(q, p, t, consts) * ln.strength * INTENSITY_TO_SI)
            cuts.append(math.inf if wing_cutoff is None else wing_cutoff * w * scale)
    return (np.array(centers, dtype=np.float64), np.array(widths, dtype=np.float64),
            np.array(amps, dtype=np.float64), np.array(cuts, dtype=np.float64))


def molecular_absorption(f, medium, consts=DEFAULT, wing_cutoff=DEFAULT_WING_CUTOFF):
    """Absorption coefficient (1/m) of ``medium`` at one or many frequencies."""
    if not medium.species:
        raise DomainError("medium has no species")
    f = np.asarray(f, dtype=np.float64)
    scalar = f.ndim == 0
    flat = np.atleast_1d(f).ravel()
    if not np.all(flat > 0):
        raise DomainError("frequencies must be > 0")
    table = line_table(medium, consts, wing_cutoff)
    order = np.argsort(flat, kind="stable")
    k_sorted = kernels.lbl_absorption(flat[order], *table[:3], _beta(medium.temperature, consts), table[3])
    k = np.empty_like(flat)
    k[order] = k_sorted
    return float(k[0]) if scalar else k.reshape(f.shape)


def free_space_gain(f, distance, consts=DEFAULT):
    return consts.speed_of_light / (4.0 * math.pi * np.asarray(f, dtype=np.float64) * distance)


def path_gain(f, medium, consts=DEFAULT, wing_cutoff=DEFAULT_WING_CUTOFF, absorption=None):
    """Complex line-of-sight gain over ``medium.path_length``.

    ``absorption`` may carry precomputed K(f) values.
    """
    f = np.asarray(f, dtype=np.float64)
    D = medium.path_length
    K = molecular_absorption(f, medium, consts, wing_cutoff) if absorption is None else np.asarray(absorption)
    c = consts.speed_of_light
    alpha = free_space_gain(f, D, consts) * np.exp(-0.5 * K * D) * np.exp(-2j * math.pi * f * D / c)
    return complex(alpha) if np.ndim(alpha) == 0 else alpha


def absorption_spectrum(grid, medium, consts=DEFAULT, wing_cutoff=DEFAULT_WING_CUTOFF):
    if not medium.species:
        raise DomainError("medium has no species")
    values = molecular_absorption(grid.frequencies, medium, consts, wing_cutoff)
    return Spectrum(grid, values, SpectrumKind.ABSORPTION_COEFFICIENT)


# --------------------------------------------------------------------------
# CSV exchange


def write_spectrum_csv(spectrum, stream):
    """Write ``frequency_hz,value`` rows at full double precision."""
    stream.write("frequency_hz,value\n")
    for f, v in zip(spectrum.frequencies, spectrum.values):
        stream.write(f"{f:.17g},{v:.17g}\n")


def spectrum_to_csv(spectrum):
    buf = io.StringIO()
    write_spectrum_csv(spectrum, buf)
    return buf.getvalue()


def read_spectrum_csv(stream, kind=SpectrumKind.TRANSMITTANCE):
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["frequency_hz", "value"]:
        raise FormatError("expected header 'frequency_hz,value'", line=1)
    freqs, vals = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise FormatError(f"expected 2 columns, got {len(row)}", line=lineno)
        try:
            freqs.append(float(row[0]))
            vals.append(float(row[1]))
        except ValueError:
            raise FormatError(f"non-numeric row {row!r}", line=lineno) from None
    try:
        grid = SpectralGrid(freqs)
    except DomainError as exc:
        raise FormatError(str(exc)) from None
    return Spectrum(grid, vals, kind)
