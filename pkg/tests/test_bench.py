import io
import math

import numpy as np
import pytest
from scipy import stats

from terasense.bench import (
    NO_NOISE, RESULT_COLUMNS, ExperimentConfig, ExtractorSpec, SnrSpec,
    SweepResult, evaluate_dataset, emit_results_csv, fit_extractor, kfold_split, parse_snr,
    read_results_csv, rep_seed, run_sweep, state_hash, synthesize_dataset, write_results_csv,
)
from terasense.errors import DomainError
from terasense.materials import synthetic_materials

SMALL = dict(
    source={"kind": "materials", "names": ["alumina", "aspirin", "chalk", "salt"]},
    per_class=20, folds=5, repetitions=2,
    extractors=[{"name": "pca", "components": 5}],
    classifiers=[{"name": "lda"}, {"name": "knn", "params": {"k": 5}}],
)


def small_cfg(**kw):
    d = dict(SMALL)
    d.update(kw)
    return ExperimentConfig.from_dict(d)


# ---------------------------------------------------------------- noise

def test_snr_spec():
    assert SnrSpec().noiseless
    assert SnrSpec(20).noise_std(np.full(10, 2.0)) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        SnrSpec(math.nan)
    assert parse_snr("inf") == NO_NOISE and parse_snr(None) == NO_NOISE
    assert parse_snr("5") == 5.0


def test_noiseless_dataset_is_exact():
    clean = {"a": np.array([1.0, 2.0, 3.0]), "b": np.array([0.5, 0.5, 0.1])}
    d = synthesize_dataset(clean, 4, SnrSpec(NO_NOISE), seed=1)
    assert d.values.shape == (8, 3)
    np.testing.assert_array_equal(d.values[:4], np.tile(clean["a"], (4, 1)))
    np.testing.assert_array_equal(d.labels, [1, 1, 1, 1, 2, 2, 2, 2])
    assert d.class_names == ("a", "b")


def test_noise_variance_at_20db():
    clean = {"x": np.linspace(0.2, 1.0, 100)}
    d = synthesize_dataset(clean, 1000, SnrSpec(20), seed=3)  # 1e5 draws
    power = np.mean(clean["x"] ** 2)
    var = np.var(d.values - clean["x"])
    assert abs(var / (power / 100) - 1) < 0.02


def test_synthesis_deterministic():
    lib = synthetic_materials(names=("alumina", "salt"))
    a = synthesize_dataset(lib, 10, 5, seed=9)
    b = synthesize_dataset(lib, 10, 5, seed=9)
    assert a.values.tobytes() == b.values.tobytes()
    c = synthesize_dataset(lib, 10, 5, seed=10)
    assert a.values.tobytes() != c.values.tobytes()
    with pytest.raises(DomainError):
        synthesize_dataset(lib, 0, 5)


# ---------------------------------------------------------------- folds

def test_kfold_thousand_samples_ten_folds():
    labels = np.repeat(np.arange(20), 50)
    folds = kfold_split(1000, 10, seed=0, labels=labels)
    assert [len(te) for _, te in folds] == [100] * 10
    for _, te in folds:
        assert np.all(np.bincount(labels[te]) == 5)  # stratified


def test_kfold_partition_law(rng):
    for M, k in ((17, 4), (50, 7), (9, 9)):
        folds = kfold_split(M, k, seed=int(rng.integers(1000)))
        tests = [te for _, te in folds]
        allidx = np.concatenate(tests)
        assert sorted(allidx) == list(range(M))
        sizes = [len(t) for t in tests]
        assert max(sizes) - min(sizes) <= 1
        for tr, te in folds:
            assert np.intersect1d(tr, te).size == 0 and tr.size + te.size == M


def test_kfold_leave_one_out():
    folds = kfold_split(6, 6, seed=0)
    assert all(len(te) == 1 for _, te in folds)


def test_kfold_stratification_fallback():
    labels = np.array([1, 1, 1, 1, 1, 1, 2, 2])
    with pytest.warns(RuntimeWarning):
        folds = kfold_split(8, 4, seed=0, labels=labels)
    assert sorted(np.concatenate([te for _, te in folds])) == list(range(8))
    with pytest.raises(DomainError):
        kfold_split(3, 4)


# ---------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(DomainError, match="unknown config field"):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(DomainError, match="folds"):
        ExperimentConfig(folds=1)
    with pytest.raises(DomainError, match="extractors"):
        ExperimentConfig(extractors=[{"name": "ica"}])
    cfg = ExperimentConfig()
    assert cfg.snr_db == tuple(float(s) for s in range(-20, 35, 5))
    assert cfg.folds == 10 and cfg.repetitions == 10
    names = [c.name for c in cfg.classifiers]
    assert names == ["gnb", "lda", "svm", "knn", "grnn", "bpnn"]
    bp = cfg.classifiers[-1].params
    assert bp["hidden"] == 10 and bp["lr"] == 0.01
    assert cfg.classifiers[4].params["spread"] == 10.0


# ---------------------------------------------------------------- pipeline

def test_no_leakage_state_hash():
    lib = synthetic_materials(names=("alumina", "chalk", "salt"))
    data = synthesize_dataset(lib, 10, 10, seed=0)
    cfg = small_cfg()
    tr, te = np.arange(0, 30, 2), np.arange(1, 30, 2)
    for spec in (ExtractorSpec("pca", 4), ExtractorSpec("pls", 2), ExtractorSpec("nmf", 3),
                 ExtractorSpec("tsne", 2)):
        model = fit_extractor(spec, data.values[tr], data.labels[tr], cfg.replace(tsne_iterations=50), 0)
        inner = getattr(model, "model", model)
        before = state_hash(inner)
        model.transform(data.values[te])
        assert state_hash(inner) == before


def test_identical_classes_chance_level():
    spec = synthetic_materials(names=("salt",))["salt"]
    clean = {"a": spec, "b": spec}
    cfg = small_cfg(snr_db=[10], repetitions=5, per_class=40)
    res = run_sweep(cfg, clean=clean)
    n = cfg.repetitions * 2 * cfg.per_class
    for r in res:
        correct = round(r.success_rate_mean * n)
        assert stats.binomtest(correct, n, 0.5).pvalue > 0.01, r


def test_noiseless_distinct_is_perfect():
    cfg = small_cfg(snr_db=["inf"], repetitions=1,
                    classifiers=[{"name": n} for n in ("gnb", "lda", "svm", "knn", "grnn", "plsda")]
                    + [{"name": "bpnn", "params": {"epochs": 500}}])
    res = run_sweep(cfg)
    for r in res:
        assert not r.failed, r.error
        assert r.success_rate_mean == 1.0, r


def test_lda_monotone_between_minus10_and_30db():
    cfg = small_cfg(snr_db=[-10, 30], repetitions=3,
                    classifiers=[{"name": "lda"}])
    res = {r.snr_db: r.success_rate_mean for r in run_sweep(cfg)}
    assert res[30.0] >= res[-10.0]


def test_success_and_rmsec_move_oppositely():
    cfg = small_cfg(snr_db=[-20, -15, -10, -5, 0, 5, 10], classifiers=[{"name": "lda"}])
    res = sorted(run_sweep(cfg), key=lambda r: r.snr_db)
    rho, _ = stats.spearmanr([r.success_rate_mean for r in res], [r.rmsec for r in res])
    assert rho < 0


def test_sweep_reproducible_and_schedule_independent():
    cfg = small_cfg(snr_db=[0, 10])
    a = run_sweep(cfg, jobs=1)
    b = run_sweep(cfg, jobs=2)
    buf_a, buf_b = io.StringIO(), io.StringIO()
    write_results_csv(a, buf_a)
    write_results_csv(b, buf_b)
    assert buf_a.getvalue() == buf_b.getvalue()
    assert rep_seed(0, 1) != rep_seed(0, 2) and rep_seed(0, 1) == rep_seed(0, 1)


def test_failed_cell_recorded_not_fatal():
    # LDA needs two samples per class in every training fold
    cfg = small_cfg(per_class=2, folds=2, snr_db=[10], repetitions=1,
                    extractors=[{"name": "none"}], classifiers=[{"name": "lda"}, {"name": "gnb"}])
    res = {r.classifier: r for r in run_sweep(cfg)}
    assert res["lda"].failed and not res["gnb"].failed


def test_evaluate_dataset_counts():
    lib = synthetic_materials(names=("alumina", "chalk"))
    data = synthesize_dataset(lib, 10, 20, seed=0)
    cells = evaluate_dataset(data, small_cfg(), seed=0)
    for cell in cells.values():
        assert cell["total"] == 20 and cell["error"] is None


# ---------------------------------------------------------------- csv

def test_results_csv(tmp_path):
    one = [SweepResult(10.0, "pca", "lda", (0.9, 1.0), 0.1234567890123456789)]
    path = tmp_path / "r.csv"
    assert emit_results_csv(one, path) == 1
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(RESULT_COLUMNS)
    assert len(text.splitlines()) == 2
    (row,) = read_results_csv(path)
    assert float(row["success_rate_mean"]) == one[0].success_rate_mean
    assert float(row["rmsec"]) == one[0].rmsec
    assert row["runtime_s"] == ""
    emit_results_csv(one, tmp_path / "r2.csv")
    assert (tmp_path / "r2.csv").read_bytes() == path.read_bytes()
    with pytest.raises(DomainError):
        emit_results_csv([], tmp_path / "empty.csv")


def test_results_sorted():
    rs = [SweepResult(s, e, c, (1.0,), 0.0) for s in (10.0, NO_NOISE, -5.0)
          for e in ("pls", "pca") for c in ("svm", "gnb")]
    buf = io.StringIO()
    write_results_csv(rs, buf)
    rows = [line.split(",")[:3] for line in buf.getvalue().splitlines()[1:]]
    keys = [(e, c, float(s)) for s, e, c in rows]
    assert keys == sorted(keys)
    assert rows[2][0] == "inf"
