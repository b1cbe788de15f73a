"""Command-line entry point.

Usage: ``terasense <subcommand> --config <path> --out <path> [--seed N] [--jobs N] [-v]``

Configs are JSON; outputs are CSV written atomically. Relative input paths
inside a config resolve against the config's directory, then against
``$TERASENSE_DATA_DIR``.
"""

import argparse
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__, catalog, preprocess
from .bench import ExperimentConfig, SnrSpec, parse_snr, run_sweep, synthesize_dataset, write_results_csv
from .classify import fit_classifier
from .constants import ATM
from .errors import TerasenseError
from .features import read_table_csv, write_table_csv
from .materials import read_materials_csv, synthetic_materials, write_materials_csv
from .physics import SpectralGrid, Spectrum, SpectrumKind, absorption_spectrum, read_spectrum_csv, write_spectrum_csv

log = logging.getLogger("terasense")

SUBCOMMANDS = ("synth-gas", "ingest-materials", "preprocess", "features", "classify",
               "bench-sweep", "fds-sense", "spike-detect")


class ConfigError(TerasenseError):
    pass


class Context:
    def __init__(self, args, config):
        self.args = args
        self.config = config
        self.base = Path(args.config).resolve().parent

    def get(self, key, default=None, required=False):
        if key not in self.config:
            if required:
                raise ConfigError(f"config field '{key}': required")
            return default
        return self.config[key]

    def path(self, key, required=True):
        value = self.get(key, required=required)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ConfigError(f"config field '{key}': expected a path string")
        return self.path_value(value)

    def path_value(self, value):
        p = Path(value)
        if not p.is_absolute() and (self.base / p).exists():
            return self.base / p
        return catalog.resolve_data_path(value)

    @property
    def seed(self):
        return self.args.seed if self.args.seed is not None else int(self.get("seed", 0))


def _atomic_write(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _number(ctx, key, default, kind=float):
    v = ctx.get(key, default)
    try:
        return kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"config field '{key}': expected a number, got {v!r}") from None


def _grid(ctx):
    band = ctx.get("band", required=True)
    if not isinstance(band, (list, tuple)) or len(band) != 2:
        raise ConfigError("config field 'band': expected [f_lo, f_hi] in Hz")
    return SpectralGrid.linspace(float(band[0]), float(band[1]), _number(ctx, "points", 1000, int))


def _medium(ctx):
    lines = catalog.load_lines(str(ctx.path("lines")) if "lines" in ctx.config else "builtin")
    state = {
        "pressure": _number(ctx, "pressure", ATM),
        "temperature": _number(ctx, "temperature", 296.0),
        "path_length": _number(ctx, "path_length", 1.0),
    }
    if "ratios" in ctx.config:
        ratios = ctx.get("ratios")
        if not isinstance(ratios, dict):
            raise ConfigError("config field 'ratios': expected {gas: mixing ratio}")
        base = ctx.get("profile")
        ratios = catalog.profile_ratios(base, ratios) if base else ratios
        return catalog.mixture(ratios, lines, **state), lines
    return catalog.default_profile(ctx.get("profile", "humid"), lines, **state), lines


def _add_noise(values, ctx):
    snr = SnrSpec(parse_snr(ctx.get("snr_db")))
    if snr.noiseless:
        return values
    return values + snr.noise_std(values) * np.random.default_rng(ctx.seed).standard_normal(values.size)


# ---------------------------------------------------------------- subcommands

def cmd_synth_gas(ctx):
    """Absorption coefficient (or |path gain| / transmittance) of a gas mixture on a grid."""
    grid = _grid(ctx)
    medium, _ = _medium(ctx)
    spec = absorption_spectrum(grid, medium)
    quantity = ctx.get("quantity", "absorption")
    if quantity == "absorption":
        values, kind = spec.values, SpectrumKind.ABSORPTION_COEFFICIENT
    elif quantity == "transmittance":
        values, kind = np.exp(-spec.values * medium.path_length), SpectrumKind.TRANSMITTANCE
    elif quantity == "gain":
        from .physics import free_space_gain

        values = free_space_gain(grid.frequencies, medium.path_length) * np.exp(-0.5 * spec.values * medium.path_length)
        kind = SpectrumKind.PATH_GAIN_MAGNITUDE
    else:
        raise ConfigError("config field 'quantity': expected absorption, transmittance or gain")
    out = Spectrum(grid, _add_noise(np.asarray(values), ctx), kind)
    buf = io.StringIO()
    write_spectrum_csv(out, buf)
    return buf.getvalue(), len(grid)


def _load_library(ctx, key="input"):
    if ctx.get(key, "builtin") == "builtin":
        band = ctx.get("band")
        kw = {"seed": ctx.seed}
        if band:
            kw["band"] = tuple(float(b) for b in band)
        if "points" in ctx.config:
            kw["points"] = _number(ctx, "points", 430, int)
        return synthetic_materials(**kw)
    with open(ctx.path(key)) as fh:
        return read_materials_csv(fh)


def cmd_ingest_materials(ctx):
    """Validate a materials CSV (or build the bundled library) and re-emit it canonically."""
    lib = _load_library(ctx)
    names = ctx.get("names")
    if names:
        missing = [n for n in names if n not in lib]
        if missing:
            raise ConfigError(f"config field 'names': unknown materials {missing}")
        lib = {n: lib[n] for n in names}
    buf = io.StringIO()
    write_materials_csv(lib, buf)
    return buf.getvalue(), len(next(iter(lib.values())).values)


def _window(ctx):
    a = ctx.args
    m = a.sg_window if a.sg_window is not None else _number(ctx, "sg_half_width", 5, int)
    p = a.sg_degree if a.sg_degree is not None else _number(ctx, "sg_degree", 3, int)
    return preprocess.SGWindow(m, p)


def cmd_preprocess(ctx):
    """Apply SNV, min-max or Savitzky-Golay to every spectrum of a materials CSV."""
    lib = _load_library(ctx)
    method = ctx.args.pre or ctx.get("method", "sg")
    names = list(lib)
    X = np.vstack([lib[n].values for n in names])
    Y = preprocess.apply(X, method, _window(ctx))
    grid = lib[names[0]].grid
    out = {n: Spectrum(grid, y, lib[n].kind) for n, y in zip(names, Y)}
    buf = io.StringIO()
    write_materials_csv(out, buf)
    return buf.getvalue(), len(grid)


def _dataset(ctx):
    """Observations from a labelled table CSV or synthesized from a materials library."""
    if "table" in ctx.config:
        with open(ctx.path("table")) as fh:
            _, X, y = read_table_csv(fh)
        return X, y
    lib = _load_library(ctx)
    data = synthesize_dataset(lib, _number(ctx, "per_class", 50, int),
                              SnrSpec(parse_snr(ctx.get("snr_db"))), ctx.seed)
    method = ctx.args.pre or ctx.get("method", "sg")
    return preprocess.apply(data.values, method, _window(ctx)), data.labels


def cmd_features(ctx):
    """Fit an extractor on the dataset and write its features with labels."""
    from .bench import ExtractorSpec, fit_extractor

    X, y = _dataset(ctx)
    name = ctx.get("extractor", required=True)
    P = _number(ctx, "components", 2 if name == "tsne" else 10, int)
    cfg = ExperimentConfig(tsne_iterations=_number(ctx, "tsne_iterations", 1000, int),
                           tsne_perplexity=_number(ctx, "perplexity", 5.0),
                           nmf_iterations=_number(ctx, "nmf_iterations", 200, int))
    model = fit_extractor(ExtractorSpec(name, P), X, y, cfg, ctx.seed)
    F = model.fit_features() if hasattr(model, "fit_features") else (
        model.embedding if hasattr(model, "embedding") else model.transform(X))
    buf = io.StringIO()
    write_table_csv(F, y, buf, [f"{name}{i + 1}" for i in range(F.shape[1])])
    return buf.getvalue(), F.shape[0]


def cmd_classify(ctx):
    """Train on one labelled table and predict another; writes per-sample scores."""
    with open(ctx.path("train")) as fh:
        _, Xtr, ytr = read_table_csv(fh)
    test_path = ctx.path("test", required=False)
    if test_path is None:
        Xte, yte = Xtr, ytr
    else:
        with open(test_path) as fh:
            _, Xte, yte = read_table_csv(fh)
    name = ctx.get("classifier", required=True)
    params = dict(ctx.get("params", {}))
    if name in ("svm", "bpnn"):
        params.setdefault("seed", ctx.seed)
    model = fit_classifier(name, Xtr, ytr, **params)
    S = model.scores(Xte)
    pred = model.classes[np.argmax(S, axis=1)]
    buf = io.StringIO()
    buf.write(",".join(["index", "label", "predicted", *(f"score_{c}" for c in model.classes)]) + "\n")
    for i, (lab, p, s) in enumerate(zip(yte, pred, S)):
        buf.write(",".join([str(i), str(lab), str(p), *(f"{v:.17g}" for v in s)]) + "\n")
    correct = int(np.count_nonzero(pred == yte))
    log.info("accuracy %d/%d", correct, len(yte))
    return buf.getvalue(), len(yte)


def _results_text(results):
    buf = io.StringIO()
    n = write_results_csv(results, buf)
    failed = [r for r in results if r.failed]
    for r in failed:
        log.error("cell %s/%s at %s dB failed: %s", r.extractor, r.classifier, r.snr_db, r.error)
    return buf.getvalue(), n, bool(failed)


def cmd_bench_sweep(ctx):
    cfg = ExperimentConfig.from_dict(ctx.config)
    if ctx.args.seed is not None:
        cfg = cfg.replace(seed=ctx.args.seed)
    if cfg.source.get("kind", "materials") == "materials" and cfg.source.get("path") not in (None, "builtin"):
        cfg = cfg.replace(source={**cfg.source, "path": str(ctx.path_value(cfg.source["path"]))})

    def progress(done, total):
        log.info("sweep job %d/%d", done, total)

    return _results_text(run_sweep(cfg, jobs=ctx.args.jobs, progress=progress))


def cmd_fds_sense(ctx):
    from .fds import FdsConfig, sense_mixture

    data = dict(ctx.config)
    if ctx.args.seed is not None:
        data["seed"] = ctx.args.seed
    if data.get("lines", "builtin") != "builtin":
        data["lines"] = str(ctx.path_value(data["lines"]))
    cfg = FdsConfig.from_dict(data)
    return _results_text(sense_mixture(cfg, jobs=ctx.args.jobs))


def cmd_spike_detect(ctx):
    """Per-species presence decisions for an absorption spectrum."""
    from .fds import spike_detect

    if "spectrum" in ctx.config:
        with open(ctx.path("spectrum")) as fh:
            spec = read_spectrum_csv(fh, SpectrumKind.ABSORPTION_COEFFICIENT)
        lines = catalog.load_lines(str(ctx.path("lines")) if "lines" in ctx.config else "builtin")
    else:
        grid = _grid(ctx)
        medium, lines = _medium(ctx)
        spec = absorption_spectrum(grid, medium)
        spec = Spectrum(grid, _add_noise(np.asarray(spec.values), ctx), spec.kind)
    threshold = _number(ctx, "threshold", 3.0)
    present = spike_detect(spec, lines, threshold, ctx.get("species"))
    buf = io.StringIO()
    buf.write("species,present\n")
    for name in sorted(present):
        buf.write(f"{name},{int(present[name])}\n")
    return buf.getvalue(), len(present)


COMMANDS = {
    "synth-gas": cmd_synth_gas,
    "ingest-materials": cmd_ingest_materials,
    "preprocess": cmd_preprocess,
    "features": cmd_features,
    "classify": cmd_classify,
    "bench-sweep": cmd_bench_sweep,
    "fds-sense": cmd_fds_sense,
    "spike-detect": cmd_spike_detect,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="terasense", description="THz spectral sensing toolkit.")
    parser.add_argument("--version", action="version", version=f"terasense {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="<subcommand>")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=(COMMANDS[name].__doc__ or "").strip().split("\n")[0] or None)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
        p.add_argument("--jobs", type=int, default=None, help="worker processes (default: logical cores)")
        p.add_argument("-v", "--verbose", action="count", default=0)
        if name in ("preprocess", "features"):
            p.add_argument("--pre", choices=("snv", "minmax", "sg", "none"), default=None)
            p.add_argument("--sg-window", type=int, default=None, help="Savitzky-Golay half width m")
            p.add_argument("--sg-degree", type=int, default=None, help="Savitzky-Golay polynomial degree")
    return parser


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.jobs is None:
        args.jobs = os.cpu_count() or 1
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    for opt in ("sg_window", "sg_degree"):
        if getattr(args, opt, None) is not None and getattr(args, opt) < 0:
            parser.error(f"--{opt.replace('_', '-')} must be >= 0")
    t0 = time.perf_counter()
    try:
        ctx = Context(args, _load_config(args.config))
        out = COMMANDS[args.command](ctx)
        text, rows = out[0], out[1]
        failed = len(out) > 2 and out[2]
        _atomic_write(args.out, text)
    except (TerasenseError, OSError, TypeError, ValueError) as exc:
        print(f"terasense {args.command}: error: {exc}", file=sys.stderr)
        return 1
    status = " (with failed cells)" if failed else ""
    print(f"terasense {args.command}: wrote {rows} rows to {args.out} in {time.perf_counter() - t0:.2f} s{status}",
          file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
