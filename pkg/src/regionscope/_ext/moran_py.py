"""Numpy fallback with the same signatures as the compiled ``moran_kernels``."""
from __future__ import annotations

import numpy as np


def _segment_sums(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Row-wise sums of consecutive column segments; empty segments give 0."""
    padded = np.concatenate([values, np.zeros((values.shape[0], 1))], axis=1)
    sums = np.add.reduceat(padded, indptr[:-1], axis=1)
    sums[:, indptr[:-1] == indptr[1:]] = 0.0
    return sums


def global_cross_products(z, indptr, indices, data, perms, out, start, stop):
    zp = z[perms[start:stop]]
    lag = _segment_sums(zp[:, indices] * data, indptr)
    out[start:stop] = (zp * lag).sum(axis=1)


def local_conditional_lags(z, indptr, data, rids, out, istart, istop):
    for i in range(istart, istop):
        lo, hi = indptr[i], indptr[i + 1]
        if hi == lo:
            out[i, :] = 0.0
            continue
        others = np.delete(z, i)
        vals = others[rids[:, : hi - lo]]
        out[i, :] = (vals * data[lo:hi]).sum(axis=1)
