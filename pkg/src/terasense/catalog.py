"""Bundled line list and the default gas-mixture profiles.

``data/thz_lines.par`` is a small illustrative line list in HITRAN 160-column
format (strong rotational lines of H2O, O2 and CH4 between 0.1 and 1 THz, with
approximate parameters). It exists so the toolkit runs out of the box; point
``lines`` at real HITRAN exports for quantitative work.
"""

import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import DomainError
from .physics import GasSpecies, MediumState, parse_hitran, read_par

# HITRAN molecule numbers
MOLECULES = {1: "H2O", 2: "CO2", 6: "CH4", 7: "O2", 22: "N2"}
MOLECULE_IDS = {name: mid for mid, name in MOLECULES.items()}

DRY_AIR = {"N2": 0.7809, "O2": 0.2095, "CO2": 4.0e-4}
HUMID_H2O = 0.02
POLLUTED_CH4 = 2.0e-4

DATA_DIR_ENV = "TERASENSE_DATA_DIR"


@lru_cache(maxsize=1)
def builtin_lines():
    text = resources.files("terasense").joinpath("data/thz_lines.par").read_text()
    return tuple(parse_hitran(text))


def resolve_data_path(name):
    """Resolve a relative data file against ``$TERASENSE_DATA_DIR`` when it is not found as given."""
    p = Path(name)
    if p.is_absolute() or p.exists():
        return p
    root = os.environ.get(DATA_DIR_ENV)
    if root and (Path(root) / p).exists():
        return Path(root) / p
    return p


def load_lines(source="builtin"):
    if source in (None, "builtin"):
        return builtin_lines()
    return tuple(read_par(resolve_data_path(source)))


def lines_by_molecule(lines):
    out = {}
    for ln in lines:
        out.setdefault(ln.molecule_id, []).append(ln)
    return {k: tuple(v) for k, v in out.items()}


def species(name, ratio, lines=None):
    """A species by chemical name, carrying its lines from ``lines``."""
    if name not in MOLECULE_IDS:
        raise DomainError(f"unknown gas {name!r}; known: {sorted(MOLECULE_IDS)}")
    lines = builtin_lines() if lines is None else lines
    own = lines_by_molecule(lines).get(MOLECULE_IDS[name], ())
    return GasSpecies.with_ratio(name, ratio, own)


def mixture(ratios, lines=None, **state):
    """MediumState from {gas name: volume mixing ratio}."""
    return MediumState(tuple(species(n, q, lines) for n, q in ratios.items()), **state)


def profile_ratios(name, overrides=None):
    """Mixing ratios of the named default profile (dry, humid or polluted)."""
    dry = dict(DRY_AIR)
    if name == "dry":
        ratios = dry
    elif name in ("humid", "polluted"):
        scale = 1.0 - HUMID_H2O
        ratios = {k: v * scale for k, v in dry.items()}
        ratios["H2O"] = HUMID_H2O
        if name == "polluted":
            ratios["CH4"] = POLLUTED_CH4
    else:
        raise DomainError(f"unknown profile {name!r}; use dry, humid or polluted")
    if overrides:
        ratios.update(overrides)
    return ratios


def default_profile(name, lines=None, **state):
    return mixture(profile_ratios(name), lines, **state)
