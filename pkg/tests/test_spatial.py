import numpy as np
import pytest

import oracles
from regionscope import kernels
from regionscope.errors import DataError
from regionscope.panel import dense_to_csr
from regionscope.spatial import (global_morans_i, lisa_classify, local_morans_i, moran_permutation_test,
                                 permutation_rows, quadrant_labels)

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


def _random_w(rng, n, density=0.3):
    w = (rng.random((n, n)) < density).astype(float)
    w = np.triu(w, 1)
    w = w + w.T
    for i in range(n):
        if not w[i].any():
            j = (i + 1) % n
            w[i, j] = w[j, i] = 1.0
    return w


def test_line_graph(line_w):
    assert global_morans_i([1, 2, 3, 4], line_w) == pytest.approx(1 / 3, abs=1e-15)
    assert np.allclose(local_morans_i([1, 2, 3, 4], line_w), [0.6, 0.4, 0.4, 0.6])


def test_matches_oracle(rng):
    for _ in range(20):
        n = int(rng.integers(3, 15))
        w = rng.random((n, n))
        np.fill_diagonal(w, 0)
        y = rng.normal(size=n)
        assert global_morans_i(y, w) == pytest.approx(oracles.moran_global(y, w.tolist()), abs=1e-12)
        assert np.allclose(local_morans_i(y, w), oracles.moran_local(y, w.tolist()), atol=1e-12)


def test_degenerate_inputs(line_w):
    with pytest.raises(DataError, match="variance"):
        global_morans_i([2, 2, 2, 2], line_w)
    with pytest.raises(DataError):
        global_morans_i([1, 2, 3], line_w)
    with pytest.raises(DataError):
        global_morans_i([1, 2, 3, 4], np.zeros((4, 4)))


def test_permutation_rows_prefix_stable():
    a = permutation_rows(42, 10, 7, 0)
    b = permutation_rows(42, 4, 7, 0)
    assert np.array_equal(a[:4], b)
    assert all(sorted(r) == list(range(7)) for r in a)
    assert not np.array_equal(permutation_rows(42, 4, 7, 1), b)
    with pytest.raises(DataError):
        permutation_rows(-1, 1, 3, 0)


def test_permutation_test_behaviour(rng):
    w = _random_w(rng, 30)
    y = rng.normal(size=30)
    res = moran_permutation_test(y, w, 499, seed=7)
    assert 1 / 500 <= res.p_value <= 1.0
    assert res.expected == pytest.approx(-1 / 29)
    assert res.perm_mean == pytest.approx(res.expected, abs=0.02)
    clustered = np.sort(rng.normal(size=30))
    line = np.zeros((30, 30))
    for i in range(29):
        line[i, i + 1] = line[i + 1, i] = 1
    strong = moran_permutation_test(clustered, line, 499, seed=7)
    assert strong.I > 0.8 and strong.p_value == 1 / 500 and strong.z_norm > 3


def test_negative_autocorrelation_uses_lower_tail(line_w):
    res = moran_permutation_test([1, -1, 1, -1], line_w, 99, seed=3)
    assert res.I < 0
    assert res.p_value <= 1.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_threads_do_not_change_results(rng, backend):
    w = _random_w(rng, 25)
    y = rng.normal(size=25)
    one = moran_permutation_test(y, w, 299, 42, threads=1, backend=backend)
    many = moran_permutation_test(y, w, 299, 42, threads=8, backend=backend)
    assert repr(one) == repr(many)
    l1 = lisa_classify(y, w, 199, 42, threads=1, backend=backend)
    l8 = lisa_classify(y, w, 199, 42, threads=8, backend=backend)
    assert np.array_equal(l1.p_value, l8.p_value)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
def test_backends_agree(rng):
    w = _random_w(rng, 40) * rng.random((40, 40))
    w = w + w.T
    z = rng.normal(size=40)
    z -= z.mean()
    csr = dense_to_csr(w)
    perms = permutation_rows(1, 64, 40, 0)
    a = kernels.global_cross_products(z, csr, perms, backend="python")
    b = kernels.global_cross_products(z, csr, perms, backend="cython")
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    rids = permutation_rows(1, 64, 39, 1)
    a = kernels.local_conditional_lags(z, csr, rids, backend="python")
    b = kernels.local_conditional_lags(z, csr, rids, backend="cython")
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_global_kernel_matches_direct(rng):
    w = _random_w(rng, 12)
    z = rng.normal(size=12)
    perms = permutation_rows(5, 10, 12, 0)
    out = kernels.global_cross_products(z, dense_to_csr(w), perms, backend="python")
    for p, perm in enumerate(perms):
        zp = z[perm]
        assert out[p] == pytest.approx(zp @ w @ zp)


def test_local_kernel_is_conditional(rng):
    w = _random_w(rng, 8)
    z = rng.normal(size=8)
    rids = permutation_rows(9, 5, 7, 1)
    out = kernels.local_conditional_lags(z, dense_to_csr(w), rids, backend="python")
    for i in range(8):
        others = np.delete(z, i)
        nbrs = np.flatnonzero(w[i])
        for p in range(5):
            vals = others[rids[p, : nbrs.size]]
            assert out[i, p] == pytest.approx((vals * w[i, nbrs]).sum())


def test_quadrants_ties_low():
    assert quadrant_labels(np.array([1.0, -1.0, 0.0, 2.0]), np.array([1.0, 1.0, 1.0, 0.0])) == (
        "HH", "LH", "LH", "HL")


def test_lisa_output(rng):
    w = _random_w(rng, 20)
    y = rng.normal(size=20)
    res = lisa_classify(y, w, 199, seed=11, alpha=0.1)
    assert res.local_i.shape == (20,) and len(res.quadrant) == 20
    assert np.all((res.p_value >= 1 / 200) & (res.p_value <= 1))
    assert np.array_equal(res.significant, res.p_value <= 0.1)
    assert res.local_i.sum() == pytest.approx(global_morans_i(y, w) * w.sum())
    with pytest.raises(DataError):
        lisa_classify(y, w, 0)
