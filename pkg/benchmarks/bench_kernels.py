"""Time the compiled kernels against the pure-Python fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Inputs are sized like the replication pipeline: a dense line-by-line grid,
one t-SNE gradient at M = 200, one BPNN epoch on 900 samples and a full
Pegasos run for one SVM pair.
"""

import argparse
import timeit

import numpy as np

from terasense import _fallback

try:
    from terasense import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    f = np.linspace(1e11, 1e12, 20_000)
    n = 200
    lbl = (f, rng.uniform(1e11, 1e12, n), rng.uniform(1e9, 5e9, n), rng.uniform(0, 1, n), 1e-13,
           np.full(n, 1.25e11))

    M = 200
    A = rng.random((M, M))
    np.fill_diagonal(A, 0)
    tsne = ((A + A.T) / np.sum(A + A.T), rng.normal(size=(M, 2)), True)

    X = np.hstack([rng.normal(size=(900, 10)), np.ones((900, 1))])
    T = np.eye(20)[rng.integers(0, 20, 900)]
    W1, W2 = rng.normal(size=(10, 11)), rng.normal(size=(20, 11))
    order = rng.permutation(900)

    Xs = np.vstack([rng.normal(-1, 1, size=(90, 10)), rng.normal(1, 1, size=(90, 10))])
    ys = np.repeat([1.0, -1.0], 90)
    orders = np.stack([rng.permutation(180) for _ in range(50)])

    return {
        "lbl_absorption": lambda m: m.lbl_absorption(*lbl),
        "tsne_grad": lambda m: m.tsne_grad(*tsne),
        "bpnn_epoch": lambda m: m.bpnn_epoch(X, T, W1.copy(), W2.copy(), order, 0.01),
        "svm_pegasos": lambda m: m.svm_pegasos(Xs, ys, 1.0, orders),
    }


def best_of(fn, mod, repeat):
    timer = timeit.Timer(lambda: fn(mod))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e .` first")
    print(f"{'kernel':<16}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, fn in cases(np.random.default_rng(0)).items():
        py = best_of(fn, _fallback, args.repeat)
        cy = best_of(fn, _kernels, args.repeat)
        print(f"{name:<16}{py * 1e3:>14.3f}{cy * 1e3:>14.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
