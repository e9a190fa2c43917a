import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from regionscope.errors import DataError
from regionscope.shortboard import (ShortboardConfig, county_table, decompose, default_thresholds,
                                    deprivation_matrix, identify_weak, run_shortboard, shortboard_indices,
                                    threshold_sweep)


def test_deprivation_is_strict():
    B = deprivation_matrix([[0.5, 0.2], [0.4, 0.9]], [0.5, 0.5])
    assert B.tolist() == [[0, 1], [1, 0]]


def test_identification_is_strict():
    B = np.array([[1, 0], [1, 1]])
    assert identify_weak(B, [0.5, 0.5], 0.5).tolist() == [0, 1]


def test_hand_example():
    A = np.array([[0.1, 0.1, 0.9], [0.9, 0.9, 0.1], [0.1, 0.9, 0.1], [0.9, 0.9, 0.9]])
    res = run_shortboard(A, [0.5, 0.5, 0.5], [1 / 3] * 3, 0.5)
    assert res.weak.tolist() == [1, 0, 1, 0]
    assert res.U == 0.5
    assert res.T_af == pytest.approx(2 / 3)
    assert res.M == pytest.approx(1 / 3)
    assert res.censored[1].sum() == 0


def test_no_weak_counties(caplog):
    res = run_shortboard(np.ones((3, 2)), [0.5, 0.5], [0.5, 0.5], 0.5)
    assert (res.U, res.T_af, res.M) == (0.0, 0.0, 0.0)
    assert decompose(res) == {}


def test_decompositions_sum_to_one(rng):
    A = rng.random((12, 5))
    res = run_shortboard(A, Q=0.3)
    assert sum(decompose(res, "indicator").values()) == pytest.approx(1.0)
    groups = ["x", "y", "z"] * 4
    assert sum(decompose(res, groups).values()) == pytest.approx(1.0)
    with pytest.raises(DataError):
        decompose(res, ["x"])
    with pytest.raises(DataError):
        decompose(res, "county")


def test_default_thresholds_are_medians(rng):
    A = rng.random((9, 3))
    assert np.array_equal(default_thresholds(A), np.median(A, axis=0))


def test_config_validation():
    with pytest.raises(DataError, match="length"):
        ShortboardConfig(np.array([0.5]), np.array([0.5, 0.5]))
    with pytest.raises(DataError, match="sum to one"):
        ShortboardConfig(np.array([0.5, 0.5]), np.array([0.7, 0.7]))
    with pytest.raises(DataError, match="cutoff"):
        ShortboardConfig(np.array([0.5, 0.5]), np.array([0.5, 0.5]), 0.0)


def test_threshold_length_mismatch():
    with pytest.raises(DataError, match="length 2"):
        deprivation_matrix(np.ones((3, 4)), [0.5, 0.5])


def test_sweep_monotone_and_order(rng):
    A = rng.random((20, 6))
    Y = np.full(6, 1 / 6)
    qs = [0.8, 0.6, 0.4, 0.2]
    rows = threshold_sweep(A, Y, qs)
    assert [r.Q for r in rows] == qs
    assert all(b.U >= a.U for a, b in zip(rows, rows[1:]))
    for r in rows:
        assert r.M == pytest.approx(r.U * r.T_af)
    with pytest.raises(DataError):
        threshold_sweep(A, Y, [])


def test_county_table(rng):
    A = rng.random((10, 4))
    res = run_shortboard(A, Q=0.25)
    rows = county_table(res, [f"c{i}" for i in range(10)])
    assert [r.ind for r in rows] == sorted((r.ind for r in rows), reverse=True)
    for r in rows:
        assert sum(r.contributions) == pytest.approx(r.ind)
        assert r.ind == pytest.approx(r.ocr * r.deg)
    with pytest.raises(DataError):
        county_table(res, ["only"])


def test_external_population_size():
    B = np.array([[1, 1], [0, 0]])
    res = shortboard_indices(B, [0.5, 0.5], 0.5, m=4)
    assert res.U == 0.25 and res.M == pytest.approx(0.25)


@settings(max_examples=100)
@given(st.integers(1, 10), st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.01, 0.99))
def test_matches_enumeration(m, n, seed, q):
    rng = np.random.default_rng(seed)
    A, X = rng.random((m, n)), rng.random(n)
    Y = rng.random(n) + 0.01
    Y /= Y.sum()
    res = run_shortboard(A, X, Y, q)
    U, T, M, _, weak = oracles.alkire_foster(A.tolist(), X.tolist(), Y.tolist(), q)
    assert res.weak.tolist() == weak
    assert res.U == pytest.approx(U, abs=1e-12)
    assert res.T_af == pytest.approx(T, abs=1e-12)
    assert res.M == pytest.approx(M, abs=1e-12)
