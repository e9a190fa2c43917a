"""Time the permutation kernels on the compiled and numpy backends.

    python benchmarks/bench_kernels.py [--n 200] [--perms 999] [--threads 1 4]

Prints one line per (kernel, backend, threads) with the best of ``--repeat``
runs, then the speedup of each compiled timing over the numpy fallback.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from regionscope import kernels
from regionscope.panel import dense_to_csr
from regionscope.spatial import permutation_rows


def knn_weights(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    pts = rng.random((n, 2))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    np.fill_diagonal(d, np.inf)
    w = np.zeros((n, n))
    nearest = np.argsort(d, axis=1)[:, :k]
    w[np.arange(n)[:, None], nearest] = 1.0
    w = np.maximum(w, w.T)
    return w / w.sum(axis=1, keepdims=True)


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--k", type=int, default=6)
    ap.add_argument("--perms", type=int, default=999)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 4])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    w = knn_weights(args.n, args.k, rng)
    csr = dense_to_csr(w)
    z = rng.normal(size=args.n)
    z -= z.mean()
    perms = permutation_rows(1, args.perms, args.n, 0)
    rids = permutation_rows(1, args.perms, args.n - 1, 1)

    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"n={args.n} k={args.k} permutations={args.perms} backends={','.join(backends)}")
    results = {}
    for name, fn, data in (("global", kernels.global_cross_products, perms),
                           ("local", kernels.local_conditional_lags, rids)):
        ref = fn(z, csr, data, backend="python")
        for backend in backends:
            for threads in args.threads:
                out = fn(z, csr, data, threads=threads, backend=backend)
                if not np.allclose(out, ref, rtol=1e-12, atol=1e-12):
                    raise SystemExit(f"{name}/{backend}/{threads}: backends disagree")
                t = best_of(lambda: fn(z, csr, data, threads=threads, backend=backend), args.repeat)
                results[name, backend, threads] = t
                print(f"{name:<7}{backend:<8}threads={threads:<3}{t * 1e3:10.2f} ms")
    if "cython" in backends:
        for name in ("global", "local"):
            base = results[name, "python", args.threads[0]]
            for threads in args.threads:
                print(f"{name}: cython x{threads} is {base / results[name, 'cython', threads]:.1f}x the numpy fallback")
    else:
        print("compiled kernels not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
