import os
import subprocess
import sys

import numpy as np
import pytest

from terasense import _fallback, kernels

try:
    from terasense import _kernels
except ImportError:  # extension not built
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def _backend_in_subprocess(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("TERASENSE_BACKEND", None)
    else:
        env["TERASENSE_BACKEND"] = env_value
    out = subprocess.run([sys.executable, "-c", "import terasense; print(terasense.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    return out.stdout.strip()


def test_forced_python_backend():
    assert _backend_in_subprocess("python") == "python"


@needs_ext
def test_default_backend_is_compiled():
    assert _backend_in_subprocess(None) == "cython"
    assert kernels.BACKEND in ("cython", "python")


@needs_ext
def test_lbl_absorption_equivalent(rng):
    f = np.sort(rng.uniform(1e11, 1e12, 5000))
    n = 200
    centres = rng.uniform(1e11, 1e12, n)
    widths = rng.uniform(1e9, 5e9, n)
    amps = rng.uniform(0, 1, n)
    amps[::7] = 0.0
    cuts = 25 * widths
    cuts[::5] = np.inf
    a = _fallback.lbl_absorption(f, centres, widths, amps, 1e-13, cuts)
    b = _kernels.lbl_absorption(f, centres, widths, amps, 1e-13, cuts)
    np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-300)


@needs_ext
def test_tsne_grad_equivalent(rng):
    M = 60
    A = rng.random((M, M))
    np.fill_diagonal(A, 0)
    P = (A + A.T) / np.sum(A + A.T)
    Y = rng.normal(size=(M, 2))
    ga, ca = _fallback.tsne_grad(P, Y, True)
    gb, cb = _kernels.tsne_grad(P, Y, True)
    np.testing.assert_allclose(gb, ga, rtol=1e-10, atol=1e-14)
    assert cb == pytest.approx(ca, rel=1e-12)


@needs_ext
def test_bpnn_epoch_equivalent(rng):
    X = np.hstack([rng.normal(size=(40, 6)), np.ones((40, 1))])
    T = np.eye(4)[rng.integers(0, 4, 40)]
    W1 = rng.normal(size=(10, 7))
    W2 = rng.normal(size=(4, 11))
    order = rng.permutation(40)
    A1, A2, B1, B2 = W1.copy(), W2.copy(), W1.copy(), W2.copy()
    sa = _fallback.bpnn_epoch(X, T, A1, A2, order, 0.05)
    sb = _kernels.bpnn_epoch(X, T, B1, B2, order, 0.05)
    assert sb == pytest.approx(sa, rel=1e-12)
    np.testing.assert_allclose(B1, A1, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(B2, A2, rtol=1e-12, atol=1e-14)


@needs_ext
def test_svm_pegasos_equivalent(rng):
    X = np.vstack([rng.normal(-1, 1, size=(30, 3)), rng.normal(1, 1, size=(30, 3))])
    y = np.repeat([1.0, -1.0], 30)
    orders = np.stack([rng.permutation(60) for _ in range(10)])
    aa, ba, oa = _fallback.svm_pegasos(X, y, 1.0, orders)
    ab, bb, ob = _kernels.svm_pegasos(X, y, 1.0, orders)
    np.testing.assert_allclose(ab, aa, rtol=1e-10, atol=1e-12)
    assert bb == pytest.approx(ba, rel=1e-10, abs=1e-12)
    assert ob == pytest.approx(oa, rel=1e-12)


def test_pipeline_identical_across_backends(tmp_path):
    """Run a small CLI job under both backends and compare the CSV output."""
    import json
    cfg = {"source": {"kind": "materials", "names": ["alumina", "chalk", "salt"]},
           "per_class": 10, "snr_db": [0, 20], "folds": 5, "repetitions": 1,
           "extractors": [{"name": "pca", "components": 4}],
           "classifiers": [{"name": "svm"}, {"name": "bpnn", "params": {"epochs": 30}}]}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    outs = []
    for backend in ("python", "auto"):
        env = dict(os.environ, TERASENSE_BACKEND=backend)
        out = tmp_path / f"{backend}.csv"
        subprocess.run([sys.executable, "-m", "terasense.cli", "bench-sweep", "--config",
                        str(tmp_path / "c.json"), "--out", str(out), "--jobs", "1"],
                       env=env, check=True, capture_output=True)
        outs.append(out.read_text())
    a = [line.split(",")[:5] for line in outs[0].splitlines()]
    b = [line.split(",")[:5] for line in outs[1].splitlines()]
    assert a == b
