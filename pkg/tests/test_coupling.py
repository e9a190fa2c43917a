import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regionscope.coupling import (DEFAULT_TAXONOMY, Band, StageTaxonomy, classify_stage, coordination_degree,
                                  couple, coupling_degree, d_grid, generalized_coupling_degree)
from regionscope.errors import DataError

unit = st.floats(0, 1)


def test_equal_scores_full_coupling():
    assert coupling_degree(0.4, 0.4) == 1.0


def test_zero_scores():
    assert coupling_degree(0.0, 0.0) == 0.0
    assert coordination_degree(0.0, 0.0) == (0.0, 0.0)


def test_hand_example():
    c = coupling_degree(0.25, 1.0)
    assert c == pytest.approx(0.8)
    t, d = coordination_degree(0.25, 1.0, 0.5)
    assert t == pytest.approx(0.625)
    assert d == pytest.approx(math.sqrt(0.5))


@given(unit, unit)
def test_coupling_bounds_and_symmetry(a, b):
    c = coupling_degree(a, b)
    assert 0.0 <= c <= 1.0 + 1e-15
    assert c == coupling_degree(b, a)


@given(unit, unit, unit)
def test_d_within_unit(a, b, alpha):
    t, d = coordination_degree(a, b, alpha)
    assert 0.0 <= d <= 1.0 + 1e-15
    assert min(a, b) - 1e-15 <= t <= max(a, b) + 1e-15


def test_out_of_range():
    with pytest.raises(DataError, match="S1"):
        coupling_degree(1.2, 0.3)
    with pytest.raises(DataError, match="alpha"):
        coordination_degree(0.3, 0.3, -0.1)


@pytest.mark.parametrize("d, label, stage", [
    (0.0, "severe disharmony and decline", "low-level coupling"),
    (0.29999, "severe disharmony and decline", "low-level coupling"),
    (0.3, "mild disharmony and decline", "antagonism"),
    (0.45, "close to disharmony and decline", "antagonism"),
    (0.5, "close to harmonious development", "preliminary synergy"),
    (0.7999, "good harmonious development", "preliminary synergy"),
    (0.8, "excellent harmonious development", "high-level coupling"),
    (1.0, "excellent harmonious development", "high-level coupling"),
])
def test_taxonomy_bands(d, label, stage):
    assert classify_stage(d) == (label, stage)


def test_taxonomy_rejects_outside():
    with pytest.raises(DataError):
        classify_stage(1.01)


def test_taxonomy_partition_checked():
    with pytest.raises(DataError, match="gap"):
        StageTaxonomy((Band(0.0, 0.4, "a", "x"), Band(0.5, 1.0, "b", "y")))
    with pytest.raises(DataError):
        StageTaxonomy((Band(0.1, 1.0, "a", "x"),))
    assert len(DEFAULT_TAXONOMY.bands) == 7


def test_generalized_reduces_to_two():
    assert generalized_coupling_degree([0.3, 0.7]) == pytest.approx(coupling_degree(0.3, 0.7))


def test_couple_grid():
    s1 = np.array([[0.5, 0.6], [0.2, 0.9]])
    s2 = np.array([[0.5, 0.3], [0.8, 0.9]])
    recs = couple(["a", "b"], [2020, 2021], s1, s2)
    assert [(r.region_id, r.year) for r in recs] == [("a", 2020), ("a", 2021), ("b", 2020), ("b", 2021)]
    grid = d_grid(recs, ["a", "b"], [2020, 2021])
    assert grid[1, 1] == pytest.approx(math.sqrt(0.9))
    with pytest.raises(DataError):
        couple(["a"], [2020, 2021], s1, s2)
