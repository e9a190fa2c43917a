import os
import subprocess
import sys

import numpy as np
import pytest

from regionscope import kernels
from regionscope.panel import dense_to_csr


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.get_backend("python").__name__.endswith("moran_py")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_forces_fallback():
    env = dict(os.environ, REGIONSCOPE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from regionscope import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.skipif(kernels.BACKEND == "cython", reason="only meaningful without the extension")
def test_cython_request_without_extension():
    with pytest.raises(ImportError):
        kernels.get_backend("cython")


def test_ranges_cover_everything():
    for total in (1, 7, 100):
        for parts in (1, 3, 16):
            r = kernels._ranges(total, parts)
            assert r[0][0] == 0 and r[-1][1] == total
            assert all(a[1] == b[0] for a, b in zip(r, r[1:]))


def test_threaded_python_local_matches_serial(rng):
    w = (rng.random((15, 15)) < 0.3).astype(float)
    np.fill_diagonal(w, 0)
    z = rng.normal(size=15)
    rids = np.array([rng.permutation(14) for _ in range(20)])
    a = kernels.local_conditional_lags(z, dense_to_csr(w), rids, threads=1, backend="python")
    b = kernels.local_conditional_lags(z, dense_to_csr(w), rids, threads=4, backend="python")
    assert np.array_equal(a, b)
