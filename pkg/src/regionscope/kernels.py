"""Backend selection for the permutation kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``REGIONSCOPE_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._ext import moran_py

_compiled = None
if os.environ.get("REGIONSCOPE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._ext import moran_kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def get_backend(name: str | None = None):
    if name is None:
        return _compiled if _compiled is not None else moran_py
    if name == "python":
        return moran_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def _ranges(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    edges = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run(fn, total: int, threads: int) -> None:
    chunks = _ranges(total, threads)
    if len(chunks) <= 1:
        for a, b in chunks:
            fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        for fut in [pool.submit(fn, a, b) for a, b in chunks]:
            fut.result()


def global_cross_products(z, csr, perms, threads: int = 1, backend: str | None = None) -> np.ndarray:
    """sum_i z_perm[i] * (W z_perm)[i] for every permutation row.

    Each output slot depends only on its own permutation, so the result does
    not depend on ``threads``.
    """
    mod = get_backend(backend)
    indptr, indices, data = csr
    z = np.ascontiguousarray(z, dtype=float)
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    out = np.zeros(perms.shape[0])
    if mod is moran_py:
        # vectorised over all rows at once; splitting would not speed it up
        threads = 1
    _run(lambda a, b: mod.global_cross_products(z, indptr, indices, data, perms, out, a, b),
         perms.shape[0], threads)
    return out


def local_conditional_lags(z, csr, rids, threads: int = 1, backend: str | None = None) -> np.ndarray:
    """Spatial lags under conditional permutation: shape (n, n_permutations)."""
    mod = get_backend(backend)
    indptr, _, data = csr
    z = np.ascontiguousarray(z, dtype=float)
    rids = np.ascontiguousarray(rids, dtype=np.int64)
    out = np.zeros((z.shape[0], rids.shape[0]))
    _run(lambda a, b: mod.local_conditional_lags(z, indptr, data, rids, out, a, b),
         z.shape[0], threads)
    return out
