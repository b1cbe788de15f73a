"""Benchmark harness: noisy dataset synthesis, k-fold cross-validation and SNR sweeps.

A sweep is split into independent jobs, one per (SNR point, repetition).
Every job derives its randomness from the master seed and its repetition
index only, so results do not depend on scheduling or worker count, and the
same repetition sees the same standard-normal noise draws at every SNR.
"""

import csv
import hashlib
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import preprocess
from .catalog import resolve_data_path
from .classify import fit_classifier
from .errors import DomainError, TerasenseError
from .features import Dataset, TsneConfig, nmf_fit, one_hot, pca_fit, pls_fit, tsne_fit
from .materials import load_materials_csv, synthetic_materials

NO_NOISE = math.inf
RESULT_COLUMNS = ("snr_db", "extractor", "classifier", "success_rate_mean",
                  "success_rate_std", "rmsec", "runtime_s")


# ---------------------------------------------------------------- noise

@dataclass(frozen=True)
class SnrSpec:
    """Per-spectrum SNR in dB; ``inf`` disables noise."""

    snr_db: float = NO_NOISE

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise DomainError(f"SNR must be finite or +inf, got {self.snr_db}")

    @property
    def noiseless(self):
        return self.snr_db == math.inf

    def noise_std(self, clean):
        """Noise standard deviation for a clean spectrum (mean-square signal power)."""
        if self.noiseless:
            return 0.0
        power = float(np.mean(np.square(clean)))
        return math.sqrt(power / 10.0 ** (self.snr_db / 10.0))


def parse_snr(value):
    """Accept numbers plus ``"inf"``/``None`` for the noiseless point."""
    if value is None or (isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "none")):
        return NO_NOISE
    v = float(value)
    if math.isnan(v) or v == -math.inf:
        raise DomainError(f"invalid SNR value {value!r}")
    return v


def class_matrix(clean):
    """Stack a {name: Spectrum or array} map into (names, K x N matrix, frequencies)."""
    if not clean:
        raise DomainError("need at least one class spectrum")
    names = list(clean)
    rows, freqs = [], None
    for n in names:
        s = clean[n]
        if hasattr(s, "values"):
            freqs = s.frequencies if freqs is None else freqs
            s = s.values
        rows.append(np.asarray(s, dtype=np.float64))
    if len({r.size for r in rows}) != 1:
        raise DomainError("class spectra have different lengths")
    return names, np.vstack(rows), freqs


def standard_noise(n_classes, per_class, n_points, seed):
    """Unit-variance draws shared by every SNR of one repetition."""
    return np.random.default_rng(seed).standard_normal((n_classes * per_class, n_points))


def synthesize_dataset(clean, per_class, snr=SnrSpec(), seed=0, noise=None):
    """``per_class`` noisy copies of each clean spectrum; labels are 1..K.

    ``noise`` may carry precomputed standard-normal draws so that several SNR
    points of one repetition reuse them.
    """
    if per_class < 1:
        raise DomainError(f"per_class must be >= 1, got {per_class}")
    if not isinstance(snr, SnrSpec):
        snr = SnrSpec(parse_snr(snr))
    names, C, freqs = class_matrix(clean)
    K, N = C.shape
    X = np.repeat(C, per_class, axis=0)
    if not snr.noiseless:
        Z = standard_noise(K, per_class, N, seed) if noise is None else noise
        std = np.array([snr.noise_std(c) for c in C])
        X = X + np.repeat(std, per_class)[:, None] * Z
    labels = np.repeat(np.arange(1, K + 1), per_class)
    return Dataset(X, labels, freqs, tuple(names))


# ---------------------------------------------------------------- folds

def kfold_split(M, folds, seed=0, labels=None):
    """Seeded k-fold partition, stratified by ``labels`` when given.

    Each class is shuffled and dealt round-robin across folds, continuing
    where the previous class stopped, so fold sizes differ by at most one.
    """
    M, folds = int(M), int(folds)
    if folds < 2:
        raise DomainError(f"need at least 2 folds, got {folds}")
    if folds > M:
        raise DomainError(f"{folds} folds exceed {M} samples")
    rng = np.random.default_rng(seed)
    order = None
    if labels is not None:
        labels = np.asarray(labels).ravel()
        if labels.size != M:
            raise DomainError("label count does not match M")
        classes, counts = np.unique(labels, return_counts=True)
        if counts.min() < folds:
            warnings.warn(
                f"smallest class has {counts.min()} samples for {folds} folds; falling back to an unstratified split",
                RuntimeWarning,
                stacklevel=2,
            )
        else:
            order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in classes])
    if order is None:
        order = rng.permutation(M)
    assign = np.arange(M) % folds
    out = []
    for k in range(folds):
        test = np.sort(order[assign == k])
        train = np.setdiff1d(np.arange(M), test, assume_unique=True)
        out.append((train, test))
    return out


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class ExtractorSpec:
    """An extractor and, optionally, classifier hyperparameter overrides for its cells."""

    name: str
    components: int = 10
    classifier_params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClassifierSpec:
    name: str
    params: dict = field(default_factory=dict)


_DEFAULT_EXTRACTORS = (
    ExtractorSpec("pca", 10), ExtractorSpec("pls", 10),
    # t-SNE cells train on a fifth of the samples; BPNN gets more epochs to compensate
    ExtractorSpec("tsne", 2, {"bpnn": {"epochs": 5000}}), ExtractorSpec("nmf", 10),
)
_DEFAULT_CLASSIFIERS = (
    ClassifierSpec("gnb"), ClassifierSpec("lda"), ClassifierSpec("svm"),
    ClassifierSpec("knn", {"k": 10}), ClassifierSpec("grnn", {"spread": 10.0}),
    ClassifierSpec("bpnn", {"hidden": 10, "lr": 0.01, "epochs": 500}),
)
EXTRACTORS = ("none", "pca", "pls", "tsne", "nmf")


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep. ``source`` is a dict: ``{"kind": "materials", "path": ...}``
    (``path`` null for the bundled synthetic library) or
    ``{"kind": "gas", "profiles": [...], "band": [lo, hi], "points": N, "distance": D}``.
    """

    source: dict = field(default_factory=lambda: {"kind": "materials", "path": None})
    per_class: int = 50
    preprocess: str = "sg"
    sg_half_width: int = 5
    sg_degree: int = 3
    extractors: tuple = _DEFAULT_EXTRACTORS
    classifiers: tuple = _DEFAULT_CLASSIFIERS
    snr_db: tuple = tuple(range(-20, 35, 5))
    folds: int = 10
    repetitions: int = 10
    seed: int = 0
    standardize: bool = True
    tsne_per_class: int = 10
    tsne_iterations: int = 1000
    tsne_perplexity: float = 5.0
    nmf_iterations: int = 200
    nmf_tol: float = 0.0
    record_runtime: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise DomainError("folds: need at least 2")
        if self.repetitions < 1:
            raise DomainError("repetitions: need at least 1")
        if self.per_class < 1:
            raise DomainError("per_class: need at least 1")
        if not self.snr_db:
            raise DomainError("snr_db: grid is empty")
        object.__setattr__(self, "snr_db", tuple(parse_snr(s) for s in self.snr_db))
        object.__setattr__(self, "extractors", tuple(
            e if isinstance(e, ExtractorSpec) else ExtractorSpec(**e) for e in self.extractors))
        object.__setattr__(self, "classifiers", tuple(
            c if isinstance(c, ClassifierSpec) else ClassifierSpec(**c) for c in self.classifiers))
        for e in self.extractors:
            if e.name not in EXTRACTORS:
                raise DomainError(f"extractors: unknown extractor {e.name!r}; choose from {EXTRACTORS}")
        if not self.extractors or not self.classifiers:
            raise DomainError("extractors/classifiers: need at least one of each")
        preprocess.apply(np.arange(2.0 * self.sg_half_width + 2), self.preprocess, self.window)

    @property
    def window(self):
        return preprocess.SGWindow(self.sg_half_width, self.sg_degree)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise DomainError(f"unknown config field(s): {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise DomainError(f"invalid config: {exc}") from None

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

    def replace(self, **changes):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return type(self)(**d)


# ---------------------------------------------------------------- sources

def load_source(source):
    """Class name -> clean spectrum map for a config ``source`` entry."""
    kind = source.get("kind", "materials")
    if kind == "materials":
        path = source.get("path")
        lib = synthetic_materials() if path in (None, "builtin") else load_materials_csv(resolve_data_path(path))
        names = source.get("names")
        if names:
            missing = [n for n in names if n not in lib]
            if missing:
                raise DomainError(f"source.names: unknown materials {missing}")
            lib = {n: lib[n] for n in names}
        return lib
    if kind == "gas":
        from .fds import gas_class_spectra

        return gas_class_spectra(source)
    raise DomainError(f"source.kind: unknown source {kind!r}")


# ---------------------------------------------------------------- pipeline

def state_hash(obj):
    """SHA-256 over every array and scalar reachable from a model's fields."""
    h = hashlib.sha256()

    def feed(x):
        if isinstance(x, np.ndarray):
            h.update(str(x.dtype).encode() + str(x.shape).encode())
            h.update(np.ascontiguousarray(x).tobytes())
        elif hasattr(x, "__dataclass_fields__"):
            for f in fields(x):
                h.update(f.name.encode())
                feed(getattr(x, f.name))
        elif isinstance(x, (list, tuple)):
            for v in x:
                feed(v)
        elif isinstance(x, dict):
            for k in sorted(x):
                h.update(str(k).encode())
                feed(x[k])
        else:
            h.update(repr(x).encode())

    feed(obj)
    return h.hexdigest()


class _Identity:
    def transform(self, X):
        return X


class _NmfExtractor:
    """NMF needs non-negative input: shift by the training minimum, clip the rest."""

    def __init__(self, X, rank, iterations, seed, tol=0.0):
        self.offset = min(0.0, float(X.min()))
        self.model = nmf_fit(X - self.offset, rank, iterations=iterations, seed=seed, tol=tol)

    def fit_features(self):
        """Coefficients of the training rows (equal to ``transform`` of them)."""
        return self.model.W

    def transform(self, X):
        return self.model.transform(np.maximum(X - self.offset, 0.0))


def fit_extractor(spec, X, labels, cfg, seed):
    P = min(int(spec.components), X.shape[0] - 1, X.shape[1])
    if spec.name == "none":
        return _Identity()
    if spec.name == "pca":
        return pca_fit(X, P)
    if spec.name == "pls":
        return pls_fit(X, one_hot(labels), P)
    if spec.name == "nmf":
        return _NmfExtractor(X, P, cfg.nmf_iterations, seed, cfg.nmf_tol)
    if spec.name == "tsne":
        tc = TsneConfig(perplexity=cfg.tsne_perplexity, output_dim=int(spec.components),
                        iterations=cfg.tsne_iterations, seed=seed)
        return tsne_fit(X, tc)
    raise DomainError(f"unknown extractor {spec.name!r}")


def _standardize(train, test):
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (train - mu) / sd, (test - mu) / sd


def _classifier_params(spec, extractor, seed):
    params = dict(spec.params)
    params.update(extractor.classifier_params.get(spec.name, {}))
    if spec.name in ("svm", "bpnn"):
        params.setdefault("seed", seed)
    return params


def _subsample(labels, per_class):
    """First ``per_class`` indices of every class."""
    keep = [np.flatnonzero(labels == c)[:per_class] for c in np.unique(labels)]
    return np.sort(np.concatenate(keep))


def evaluate_dataset(data, cfg, seed):
    """Cross-validate every (extractor, classifier) cell on one dataset.

    Returns {(extractor, classifier): dict(correct, total, sq_err, n_scores,
    runtime, error)}.
    """
    X = preprocess.apply(data.values, cfg.preprocess, cfg.window)
    y = data.labels
    out = {}
    for e_idx, espec in enumerate(cfg.extractors):
        if espec.name == "tsne" and cfg.tsne_per_class:
            idx = _subsample(y, cfg.tsne_per_class)
            Xe, ye = X[idx], y[idx]
        else:
            Xe, ye = X, y
        cells = {c.name: dict(correct=0, total=0, sq_err=0.0, n_scores=0, runtime=0.0, error=None)
                 for c in cfg.classifiers}
        try:
            splits = kfold_split(Xe.shape[0], cfg.folds, seed, ye)
        except TerasenseError as exc:
            for cell in cells.values():
                cell["error"] = f"{type(exc).__name__}: {exc}"
            splits = []
        for f_idx, (tr, te) in enumerate(splits):
            t0 = time.perf_counter()
            try:
                model = fit_extractor(espec, Xe[tr], ye[tr], cfg, seed + f_idx)
                before = state_hash(getattr(model, "model", model))
                Ftr = model.fit_features() if hasattr(model, "fit_features") else model.transform(Xe[tr])
                Fte = model.transform(Xe[te])
                if state_hash(getattr(model, "model", model)) != before:
                    raise RuntimeError("extractor state changed during transform")
            except (TerasenseError, ArithmeticError, np.linalg.LinAlgError) as exc:
                for cell in cells.values():
                    cell["error"] = cell["error"] or f"{espec.name}: {type(exc).__name__}: {exc}"
                continue
            ext_time = time.perf_counter() - t0
            if cfg.standardize:
                Ftr, Fte = _standardize(Ftr, Fte)
            for c_idx, cspec in enumerate(cfg.classifiers):
                cell = cells[cspec.name]
                if cell["error"]:
                    continue
                t1 = time.perf_counter()
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", RuntimeWarning)
                        clf = fit_classifier(cspec.name, Ftr, ye[tr],
                                             **_classifier_params(cspec, espec, seed + 1000 * f_idx + c_idx))
                        S = clf.scores(Fte)
                except (TerasenseError, ArithmeticError, np.linalg.LinAlgError) as exc:
                    cell["error"] = f"{type(exc).__name__}: {exc}"
                    continue
                pred = clf.classes[np.argmax(S, axis=1)]
                cell["correct"] += int(np.count_nonzero(pred == ye[te]))
                cell["total"] += te.size
                T = (ye[te][:, None] == clf.classes[None, :]).astype(np.float64)
                cell["sq_err"] += float(np.sum((T - S) ** 2))
                cell["n_scores"] += S.size
                cell["runtime"] += time.perf_counter() - t1 + ext_time / len(cfg.classifiers)
        for cname, cell in cells.items():
            out[(espec.name, cname)] = cell
    return out


def rep_seed(master, rep):
    """Integer seed for repetition ``rep`` derived from the master seed."""
    return int(np.random.SeedSequence([int(master), int(rep)]).generate_state(1)[0])


def _run_job(args):
    cfg, clean, snr, rep = args
    seed = rep_seed(cfg.seed, rep)
    data = synthesize_dataset(clean, cfg.per_class, SnrSpec(snr), seed)
    return snr, rep, evaluate_dataset(data, cfg, seed)


@dataclass(frozen=True)
class SweepResult:
    snr_db: float
    extractor: str
    classifier: str
    success_rates: tuple
    rmsec: float
    runtime_s: float = None
    error: str = None

    @property
    def failed(self):
        return self.error is not None

    @property
    def success_rate_mean(self):
        return float(np.mean(self.success_rates)) if self.success_rates else math.nan

    @property
    def success_rate_std(self):
        return float(np.std(self.success_rates)) if self.success_rates else math.nan

    @property
    def key(self):
        return (self.extractor, self.classifier, self.snr_db)


def _aggregate(cfg, job_results):
    grouped = {}
    for snr, rep, cells in job_results:
        for (e, c), cell in cells.items():
            grouped.setdefault((snr, e, c), []).append((rep, cell))
    results = []
    for (snr, e, c), reps in grouped.items():
        reps.sort(key=lambda rc: rc[0])
        errors = [cell["error"] for _, cell in reps if cell["error"]]
        if errors:
            results.append(SweepResult(snr, e, c, (), math.nan,
                                       None, errors[0]))
            continue
        rates = tuple(cell["correct"] / cell["total"] for _, cell in reps)
        sq = sum(cell["sq_err"] for _, cell in reps)
        n = sum(cell["n_scores"] for _, cell in reps)
        runtime = sum(cell["runtime"] for _, cell in reps) if cfg.record_runtime else None
        results.append(SweepResult(snr, e, c, rates, math.sqrt(sq / n), runtime))
    results.sort(key=lambda r: r.key)
    return results


def run_sweep(cfg, jobs=1, clean=None, progress=None):
    """Run every (SNR, repetition) job and aggregate per (SNR, extractor, classifier).

    ``jobs`` > 1 spreads jobs over worker processes; output is identical.
    """
    clean = load_source(cfg.source) if clean is None else clean
    tasks = [(cfg, clean, snr, rep) for snr in cfg.snr_db for rep in range(cfg.repetitions)]
    done = []
    if jobs is None or jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for r in pool.map(_run_job, tasks):
                done.append(r)
                if progress:
                    progress(len(done), len(tasks))
    else:
        for t in tasks:
            done.append(_run_job(t))
            if progress:
                progress(len(done), len(tasks))
    return _aggregate(cfg, done)


# ---------------------------------------------------------------- output

def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return "inf" if v == math.inf else f"{v:.17g}"
    return str(v)


def results_rows(results):
    rows = sorted(results, key=lambda r: r.key)
    for r in rows:
        yield [_fmt(float(r.snr_db)), r.extractor, r.classifier,
               _fmt(r.success_rate_mean), _fmt(r.success_rate_std), _fmt(r.rmsec), _fmt(r.runtime_s)]


def write_results_csv(results, stream):
    if not results:
        raise DomainError("no results to write")
    stream.write(",".join(RESULT_COLUMNS) + "\n")
    n = 0
    for row in results_rows(results):
        stream.write(",".join(row) + "\n")
        n += 1
    return n


def emit_results_csv(results, path):
    """Write the results table to ``path``; returns the row count."""
    with open(path, "w", newline="") as fh:
        return write_results_csv(results, fh)


def read_results_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise DomainError(f"unexpected results header {reader.fieldnames}")
        return [dict(r) for r in reader]
