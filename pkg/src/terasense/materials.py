"""Material transmittance libraries: CSV exchange and a synthetic generator.

The generator stands in for measured sub-THz transmittance of pressed powder
pellets. Each material gets a seeded Lorentz-oscillator permittivity, the
slab transmittance follows from :func:`spectroscopy.transmission_forward`,
and a smooth scattering loss is applied on top.
"""

import csv
import zlib

import numpy as np

from .errors import FormatError
from .physics import SpectralGrid, Spectrum, SpectrumKind
from .spectroscopy import transmission_forward

MATERIAL_NAMES = (
    "alumina", "aspirin", "baking powder", "baking soda", "chalk",
    "caffeine", "citric acid", "cornstarch", "flour", "glucose",
    "gypsum", "ibuprofen", "lactose", "paracetamol", "polyethylene",
    "salt", "silica", "sucrose", "talc", "teflon",
)

DEFAULT_BAND = (0.2e12, 3.0e12)
DEFAULT_POINTS = 430


def load_materials_csv(path):
    """Read ``frequency_hz,<name>,...`` into an ordered {name: Spectrum} map."""
    with open(path, newline="") as fh:
        return read_materials_csv(fh)


def read_materials_csv(stream):
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or header[0].strip() != "frequency_hz":
        raise FormatError("first column must be 'frequency_hz'", line=1)
    names = [h.strip() for h in header[1:]]
    if not names:
        raise FormatError("no material columns", line=1)
    seen = set()
    for n in names:
        if n in seen:
            raise FormatError(f"duplicate material column {n!r}", line=1)
        seen.add(n)
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"ragged row: expected {len(header)} columns, got {len(row)}", line=lineno)
        try:
            rows.append([float(v) for v in row])
        except ValueError:
            raise FormatError(f"non-numeric entry in {row!r}", line=lineno) from None
    if not rows:
        raise FormatError("no data rows")
    table = np.array(rows)
    f = table[:, 0]
    if f.size > 1 and not np.all(np.diff(f) > 0):
        raise FormatError("frequency column is not strictly increasing")
    grid = SpectralGrid(f)
    return {n: Spectrum(grid, table[:, i + 1], SpectrumKind.TRANSMITTANCE) for i, n in enumerate(names)}


def write_materials_csv(materials, stream):
    names = list(materials)
    grid = materials[names[0]].grid
    for n in names[1:]:
        if not np.array_equal(materials[n].frequencies, grid.frequencies):
            raise FormatError(f"material {n!r} is on a different grid")
    stream.write(",".join(["frequency_hz", *names]) + "\n")
    cols = np.column_stack([materials[n].values for n in names])
    for f, row in zip(grid.frequencies, cols):
        stream.write(",".join([f"{f:.17g}", *(f"{v:.17g}" for v in row)]) + "\n")


def _material_rng(name, seed):
    return np.random.default_rng([zlib.crc32(name.encode()), int(seed)])


def oscillator_index(freqs, eps_inf, centers, strengths, dampings):
    """Complex refractive index of a sum of Lorentz oscillators."""
    f = np.asarray(freqs, dtype=np.float64)[:, None]
    eps = eps_inf + np.sum(strengths * centers ** 2 / (centers ** 2 - f ** 2 - 1j * dampings * f), axis=1)
    return np.sqrt(eps)


def synthetic_transmittance(name, grid, seed=0):
    rng = _material_rng(name, seed)
    f = grid.frequencies
    lo, hi = f[0], f[-1]
    k = int(rng.integers(2, 5))
    centers = np.sort(rng.uniform(lo + 0.1 * (hi - lo), hi, size=k))
    strengths = rng.uniform(0.01, 0.08, size=k)
    dampings = rng.uniform(0.03, 0.15, size=k) * 1e12
    eps_inf = rng.uniform(1.8, 3.5)
    thickness = rng.uniform(0.8e-3, 2.5e-3)
    n_c = oscillator_index(f, eps_inf, centers, strengths, dampings)
    T = np.abs(transmission_forward(n_c.real, np.maximum(n_c.imag, 0.0), thickness, f))
    # powder scattering: smooth extra loss growing with frequency
    scatter = rng.uniform(0.0, 0.6) * (f / hi) ** rng.uniform(1.5, 4.0)
    return T * np.exp(-scatter)


def synthetic_materials(names=MATERIAL_NAMES, band=DEFAULT_BAND, points=DEFAULT_POINTS, seed=0):
    """Deterministic {name: transmittance Spectrum} library on a shared grid."""
    grid = SpectralGrid.linspace(band[0], band[1], points)
    return {n: Spectrum(grid, synthetic_transmittance(n, grid, seed), SpectrumKind.TRANSMITTANCE)
            for n in names}
