"""Carrier-based frequency-domain sensing of gas mixtures.

A carrier plan picks the probe frequencies; each observation is the vector
of path-gain magnitudes at those carriers over a fixed distance, with noise
at a configured SNR. Profiles are then told apart with the same
cross-validated pipeline as :mod:`terasense.bench`.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import catalog
from .bench import (
    ClassifierSpec, ExperimentConfig, ExtractorSpec, SnrSpec, _aggregate,
    evaluate_dataset, parse_snr, rep_seed, synthesize_dataset,
)
from .constants import ATM
from .errors import AllocationError, DomainError
from .physics import (
    MediumState, SpectralGrid, Spectrum, SpectrumKind, free_space_gain, lorentz_halfwidth,
    molecular_absorption, shifted_resonance,
)

STRATEGIES = ("uniform", "random", "resonant")
DEFAULT_DISTANCE = 5.0


@dataclass(frozen=True)
class CarrierPlan:
    strategy: str
    count: int
    band: tuple
    target_species: tuple = ()
    carriers: tuple = ()
    label: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise DomainError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if int(self.count) < 1:
            raise DomainError(f"count must be >= 1, got {self.count}")
        lo, hi = (float(b) for b in self.band)
        if not 0 < lo < hi:
            raise DomainError(f"band must satisfy 0 < f_lo < f_hi, got {self.band}")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "band", (lo, hi))
        ts = self.target_species
        object.__setattr__(self, "target_species", (ts,) if isinstance(ts, str) else tuple(ts))
        object.__setattr__(self, "carriers", tuple(float(c) for c in self.carriers))
        if not self.label:
            tag = "+".join(self.target_species) if self.strategy == "resonant" else ""
            object.__setattr__(self, "label", f"{self.strategy}{'-' + tag if tag else ''}-{self.count}")

    @property
    def resolved(self):
        return len(self.carriers) == self.count

    @property
    def frequencies(self):
        if not self.resolved:
            raise DomainError(f"carrier plan {self.label!r} is not resolved; call allocate_carriers")
        return np.array(self.carriers)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in {f.name for f in fields(cls)}})


@dataclass(frozen=True)
class MixtureProfile:
    name: str
    medium: MediumState

    @classmethod
    def default(cls, name, lines=None, distance=DEFAULT_DISTANCE, **state):
        return cls(name, catalog.default_profile(name, lines, path_length=distance, **state))

    @classmethod
    def custom(cls, name, ratios, lines=None, distance=DEFAULT_DISTANCE, **state):
        return cls(name, catalog.mixture(ratios, lines, path_length=distance, **state))

    @classmethod
    def vacuum(cls, distance=DEFAULT_DISTANCE):
        return cls("vacuum", MediumState((), path_length=distance))

    @classmethod
    def from_spec(cls, spec, lines=None, distance=DEFAULT_DISTANCE):
        """A profile from a name (``dry``/``humid``/``polluted``) or a dict.

        Dict form: ``{"name": ..., "base": "humid", "ratios": {...},
        "pressure": Pa, "temperature": K}``; ``ratios`` override the base.
        """
        if isinstance(spec, str):
            return cls.default(spec, lines, distance)
        if not isinstance(spec, dict) or "name" not in spec:
            raise DomainError("profiles: each entry needs a name")
        state = {k: float(spec[k]) for k in ("pressure", "temperature") if k in spec}
        base = spec.get("base")
        ratios = catalog.profile_ratios(base, spec.get("ratios")) if base else dict(spec.get("ratios", {}))
        if not ratios:
            raise DomainError(f"profiles: {spec['name']!r} has neither base nor ratios")
        return cls.custom(spec["name"], ratios, lines, distance, **state)


def _unit_grid(lo, hi, n):
    return np.linspace(lo, hi, n) if n > 1 else np.array([0.5 * (lo + hi)])


def resonant_candidates(lines, species, band, pressure=ATM, temperature=296.0, ratio=None):
    """(frequency, half-width, strength) of the species' lines inside the band, strongest first."""
    mid = catalog.MOLECULE_IDS.get(species)
    if mid is None:
        raise DomainError(f"unknown target species {species!r}")
    q = catalog.profile_ratios("polluted").get(species, 0.0) if ratio is None else ratio
    out = []
    for ln in lines:
        if ln.molecule_id != mid:
            continue
        fc = shifted_resonance(ln, pressure)
        if band[0] <= fc <= band[1]:
            out.append((fc, lorentz_halfwidth(ln, q, pressure, temperature), ln.strength))
    out.sort(key=lambda c: (-c[2], c[0]))
    return out


def allocate_carriers(plan, lines=None, seed=0, pressure=ATM, temperature=296.0):
    """Resolve a plan's carrier frequencies (sorted ascending)."""
    lo, hi = plan.band
    n = plan.count
    if plan.strategy == "uniform":
        carriers = _unit_grid(lo, hi, n)
    elif plan.strategy == "random":
        carriers = np.sort(np.random.default_rng(seed).uniform(lo, hi, size=n))
    else:
        if not plan.target_species:
            raise AllocationError("resonant plan needs target species")
        lines = catalog.builtin_lines() if lines is None else lines
        cands = []
        for sp in plan.target_species:
            cands.extend(resonant_candidates(lines, sp, plan.band, pressure, temperature))
        if not cands:
            raise AllocationError(f"no lines of {list(plan.target_species)} inside the band {plan.band}")
        cands.sort(key=lambda c: (-c[2], c[0]))
        chosen = []
        for fc, w, _ in cands:
            if len(chosen) == n:
                break
            if all(abs(fc - c) > max(w, cw) for c, cw in chosen):
                chosen.append((fc, w))
        pad = n - len(chosen)
        carriers = np.sort(np.concatenate([[c for c, _ in chosen], _unit_grid(lo, hi, pad) if pad else []]))
    return replace(plan, carriers=tuple(float(c) for c in carriers))


def channel_magnitude(freqs, medium):
    """Noiseless |path gain| at ``freqs`` over ``medium.path_length``."""
    freqs = np.asarray(freqs, dtype=np.float64)
    has_lines = any(s.lines for s in medium.species)
    K = molecular_absorption(freqs, medium) if has_lines else np.zeros_like(freqs)
    return free_space_gain(freqs, medium.path_length) * np.exp(-0.5 * K * medium.path_length)


def measure_channel(plan, profile, snr=SnrSpec(), seed=0):
    """One observation: |path gain| at each carrier plus seeded noise."""
    if not isinstance(snr, SnrSpec):
        snr = SnrSpec(parse_snr(snr))
    clean = channel_magnitude(plan.frequencies, profile.medium)
    if snr.noiseless:
        return clean
    return clean + snr.noise_std(clean) * np.random.default_rng(seed).standard_normal(clean.size)


def spike_detect(spectrum, lines=None, threshold=3.0, species=None, pressure=ATM):
    """Per-species presence test on an absorption spectrum.

    A species is present when the spectrum at its strongest in-band line
    exceeds ``threshold`` times the spectrum median.
    """
    if spectrum.kind != SpectrumKind.ABSORPTION_COEFFICIENT:
        raise DomainError(f"spike detection needs an absorption spectrum, got {spectrum.kind.value}")
    if threshold < 0:
        raise DomainError("threshold must be >= 0")
    lines = catalog.builtin_lines() if lines is None else lines
    f = spectrum.frequencies
    v = np.asarray(spectrum.values, dtype=np.float64)
    baseline = float(np.median(v))
    ids = {catalog.MOLECULES.get(ln.molecule_id, str(ln.molecule_id)): ln.molecule_id for ln in lines}
    names = sorted(ids) if species is None else list(species)
    out = {}
    for name in names:
        mid = ids.get(name, catalog.MOLECULE_IDS.get(name))
        inband = [ln for ln in lines if ln.molecule_id == mid and f[0] <= shifted_resonance(ln, pressure) <= f[-1]]
        if not inband:
            out[name] = False
            continue
        best = max(inband, key=lambda ln: (ln.strength, -ln.resonance))
        peak = float(np.interp(shifted_resonance(best, pressure), f, v))
        out[name] = peak > threshold * baseline
    return out


# ---------------------------------------------------------------- sweeps

def _default_plans(band):
    return (
        {"strategy": "uniform", "count": 100, "band": band},
        {"strategy": "random", "count": 100, "band": band},
        {"strategy": "resonant", "count": 100, "band": band, "target_species": ["H2O"]},
    )


@dataclass(frozen=True)
class FdsConfig:
    band: tuple
    profiles: tuple = ("dry", "humid", "polluted")
    plans: tuple = None
    distance: float = DEFAULT_DISTANCE
    classifier: dict = field(default_factory=lambda: {"name": "lda"})
    extractor: dict = field(default_factory=lambda: {"name": "none"})
    snr_db: tuple = tuple(range(0, 130, 10)) + ("inf",)
    per_class: int = 50
    folds: int = 10
    repetitions: int = 10
    seed: int = 0
    lines: str = "builtin"
    record_runtime: bool = False

    def __post_init__(self):
        if self.band is None or len(self.band) != 2:
            raise DomainError("band: required as [f_lo, f_hi] in Hz")
        band = tuple(float(b) for b in self.band)
        if not 0 < band[0] < band[1]:
            raise DomainError(f"band: need 0 < f_lo < f_hi, got {self.band}")
        object.__setattr__(self, "band", band)
        if len(self.profiles) < 2:
            raise DomainError("profiles: need at least 2")
        object.__setattr__(self, "profiles", tuple(self.profiles))
        plans = _default_plans(band) if self.plans is None else self.plans
        plans = tuple(p if isinstance(p, CarrierPlan) else CarrierPlan.from_dict({"band": band, **p}) for p in plans)
        if len({p.label for p in plans}) != len(plans):
            raise DomainError("plans: labels must be unique")
        object.__setattr__(self, "plans", plans)
        object.__setattr__(self, "snr_db", tuple(parse_snr(s) for s in self.snr_db))
        if not self.distance > 0:
            raise DomainError("distance: must be > 0")

    @classmethod
    def from_dict(cls, data):
        unknown = sorted(set(data) - {f.name for f in fields(cls)})
        if unknown:
            raise DomainError(f"unknown config field(s): {', '.join(unknown)}")
        if "band" not in data:
            raise DomainError("band: required as [f_lo, f_hi] in Hz")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DomainError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise DomainError("config must be a JSON object")
        return cls.from_dict(data)

    def pipeline(self):
        """The bench configuration used to cross-validate each plan."""
        ext = dict(self.extractor)
        return ExperimentConfig(
            preprocess="none", extractors=(ExtractorSpec(**ext),),
            classifiers=(ClassifierSpec(self.classifier["name"], dict(self.classifier.get("params", {}))),),
            snr_db=self.snr_db, folds=self.folds, repetitions=self.repetitions, seed=self.seed,
            per_class=self.per_class, tsne_per_class=0,
        )


def resolve_profiles(cfg, lines):
    return [MixtureProfile.from_spec(p, lines, cfg.distance) for p in cfg.profiles]


def plan_signatures(plan, profiles):
    """Noiseless class signature per profile for a resolved plan."""
    return {p.name: channel_magnitude(plan.frequencies, p.medium) for p in profiles}


def _fds_job(args):
    pipe, label, clean, snr, rep = args
    seed = rep_seed(pipe.seed, rep)
    data = synthesize_dataset(clean, pipe.per_class, SnrSpec(snr), seed)
    cells = evaluate_dataset(data, pipe, seed)
    return label, snr, rep, cells


def sense_mixture(cfg, jobs=1, lines=None, profiles=None):
    """Cross-validated profile identification per carrier plan and SNR.

    Returns SweepResult rows whose ``extractor`` reads ``<plan label>:<extractor>``.
    """
    lines = catalog.load_lines(cfg.lines) if lines is None else lines
    profiles = resolve_profiles(cfg, lines) if profiles is None else profiles
    if len(profiles) < 2:
        raise DomainError("need at least 2 profiles")
    pipe = cfg.pipeline()
    plans = [allocate_carriers(p, lines, cfg.seed) for p in cfg.plans]
    tasks = []
    for plan in plans:
        clean = plan_signatures(plan, profiles)
        tasks.extend((pipe, plan.label, clean, snr, rep) for snr in pipe.snr_db for rep in range(pipe.repetitions))
    if jobs is None or jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_fds_job, tasks))
    else:
        done = [_fds_job(t) for t in tasks]
    results = []
    for plan in plans:
        mine = [(snr, rep, cells) for label, snr, rep, cells in done if label == plan.label]
        for r in _aggregate(pipe.replace(record_runtime=cfg.record_runtime), mine):
            results.append(replace(r, extractor=f"{plan.label}:{r.extractor}"))
    results.sort(key=lambda r: r.key)
    return results


def gas_class_spectra(source):
    """Absorption-coefficient spectrum per gas profile, for bench sweeps."""
    band = source.get("band")
    if not band or len(band) != 2:
        raise DomainError("source.band: required as [f_lo, f_hi] in Hz")
    lines = catalog.load_lines(source.get("lines", "builtin"))
    grid = SpectralGrid.linspace(float(band[0]), float(band[1]), int(source.get("points", 430)))
    profiles = source.get("profiles", ["dry", "humid", "polluted"])
    out = {}
    for spec in profiles:
        prof = MixtureProfile.from_spec(spec, lines)
        K = molecular_absorption(grid.frequencies, prof.medium) if any(s.lines for s in prof.medium.species) \
            else np.zeros(len(grid))
        out[prof.name] = Spectrum(grid, K, SpectrumKind.ABSORPTION_COEFFICIENT)
    return out


def success_curves(results):
    """{extractor label: (snr array, mean success array)} from sweep rows."""
    curves = {}
    for r in sorted(results, key=lambda r: r.key):
        curves.setdefault(r.extractor, ([], []))
        curves[r.extractor][0].append(r.snr_db)
        curves[r.extractor][1].append(r.success_rate_mean)
    return {k: (np.array(a), np.array(b)) for k, (a, b) in curves.items()}


__all__ = [
    "CarrierPlan", "MixtureProfile", "FdsConfig", "allocate_carriers", "measure_channel",
    "channel_magnitude", "sense_mixture", "spike_detect", "gas_class_spectra", "resonant_candidates",
    "success_curves",
]
