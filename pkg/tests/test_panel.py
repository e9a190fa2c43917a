import json

import numpy as np
import pytest

from regionscope.errors import DataError
from regionscope.panel import (BINARY_CONTIGUITY, INVERSE_DISTANCE, Region, WeightMatrix,
                               build_weight_matrix, haversine_km, load_panel, save_panel,
                               save_schema, schema_from_dict)


def _schema(regions=None):
    return {
        "dimensions": ["education", "environment"],
        "indicators": [
            {"id": "x1", "name": "spend", "direction": "positive", "dimension": "education"},
            {"id": "x2", "name": "pm", "direction": "negative", "dimension": "environment"},
        ],
        "regions": regions or [
            {"id": "a", "group": "g1", "lon": 120.0, "lat": 30.0, "neighbors": ["b"]},
            {"id": "b", "group": "g1", "lon": 121.0, "lat": 30.0, "neighbors": ["a", "c"]},
            {"id": "c", "group": "g2", "lon": 122.0, "lat": 30.5, "neighbors": ["b"]},
        ],
    }


def _write(tmp_path, rows, schema=None):
    (tmp_path / "schema.json").write_text(json.dumps(schema or _schema()))
    lines = ["region_id,year,indicator_id,value"] + [",".join(map(str, r)) for r in rows]
    (tmp_path / "panel.csv").write_text("\n".join(lines) + "\n")
    return tmp_path / "panel.csv", tmp_path / "schema.json"


def _full_rows(value=lambda r, y, i: 1.0):
    return [(r, y, i, value(r, y, i)) for r in "abc" for y in (2017, 2018) for i in ("x1", "x2")]


def test_load_well_formed(tmp_path):
    panel = load_panel(*_write(tmp_path, _full_rows()))
    assert panel.region_ids == ["a", "b", "c"]
    assert panel.years == (2017, 2018)
    assert panel.values.shape == (3, 2, 2)
    assert panel.n_missing == 0


def test_empty_cell_is_missing(tmp_path):
    rows = _full_rows()
    rows[0] = ("a", 2017, "x1", "")
    panel = load_panel(*_write(tmp_path, rows))
    assert panel.values.shape == (3, 2, 2)
    assert panel.n_missing == 1 and np.isnan(panel.values[0, 0, 0])


def test_unparseable_cell_counted(tmp_path):
    rows = _full_rows()
    rows[1] = ("a", 2017, "x2", "n/a")
    panel = load_panel(*_write(tmp_path, rows))
    assert panel.parse_warnings == 1 and panel.n_missing == 1


def test_unknown_indicator_named(tmp_path):
    rows = _full_rows() + [("a", 2017, "x9", 1.0)]
    with pytest.raises(DataError, match="x9"):
        load_panel(*_write(tmp_path, rows))


def test_unknown_region_named(tmp_path):
    with pytest.raises(DataError, match="zz"):
        load_panel(*_write(tmp_path, _full_rows() + [("zz", 2017, "x1", 1.0)]))


def test_duplicate_row_rejected(tmp_path):
    rows = _full_rows()
    with pytest.raises(DataError, match="duplicate"):
        load_panel(*_write(tmp_path, rows + [rows[0]]))


def test_bad_header(tmp_path):
    p, s = _write(tmp_path, _full_rows())
    p.write_text("region,year,indicator,value\n")
    with pytest.raises(DataError, match="header"):
        load_panel(p, s)


def test_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    rows = _full_rows(lambda r, y, i: float(rng.normal()))
    rows[3] = ("a", 2018, "x2", "")
    panel = load_panel(*_write(tmp_path, rows))
    out = tmp_path / "again"
    out.mkdir()
    save_panel(panel, out / "panel.csv")
    save_schema(panel.schema, out / "schema.json")
    again = load_panel(out / "panel.csv", out / "schema.json")
    assert panel.equals(again)


def test_values_read_only(tmp_path):
    panel = load_panel(*_write(tmp_path, _full_rows()))
    with pytest.raises(ValueError):
        panel.values[0, 0, 0] = 5.0


def test_asymmetric_neighbors_rejected():
    doc = _schema([{"id": "a", "neighbors": ["b"]}, {"id": "b", "neighbors": []}])
    with pytest.raises(DataError, match="symmetric"):
        schema_from_dict(doc)


def test_county_needs_city_parent():
    doc = _schema([{"id": "a"}, {"id": "k", "level": "county", "parent": "nowhere"}])
    with pytest.raises(DataError, match="parent"):
        schema_from_dict(doc)


def test_undeclared_dimension():
    doc = _schema()
    doc["indicators"][0]["dimension"] = "health"
    with pytest.raises(DataError, match="health"):
        schema_from_dict(doc)


def _line_regions(n=4):
    ids = [f"r{i}" for i in range(n)]
    return [
        Region(ids[i], neighbors=frozenset(ids[j] for j in (i - 1, i + 1) if 0 <= j < n))
        for i in range(n)
    ]


def test_line_contiguity():
    w = build_weight_matrix(_line_regions(), BINARY_CONTIGUITY, row_standardize=False)
    assert w.entries.sum() == 6
    assert np.array_equal(w.entries, w.entries.T)
    assert w.region_order == ("r0", "r1", "r2", "r3")


def test_line_row_standardized():
    w = build_weight_matrix(_line_regions(), BINARY_CONTIGUITY, row_standardize=True)
    assert np.allclose(w.entries[1], [0.5, 0, 0.5, 0])
    assert np.allclose(w.entries.sum(axis=1), 1.0, atol=1e-12)


def test_island_rejected():
    regions = _line_regions(3) + [Region("lonely", neighbors=frozenset())]
    with pytest.raises(DataError, match="lonely"):
        build_weight_matrix(regions, BINARY_CONTIGUITY)


def test_inverse_distance_one_degree():
    regions = [Region("a", centroid=(0.0, 0.0)), Region("b", centroid=(0.0, 1.0))]
    w = build_weight_matrix(regions, INVERSE_DISTANCE, row_standardize=False)
    assert w.entries[0, 1] == pytest.approx(1 / 111.19, rel=1e-4)
    assert w.entries[0, 1] == w.entries[1, 0]


def test_coincident_centroids():
    regions = [Region("a", centroid=(1.0, 1.0)), Region("b", centroid=(1.0, 1.0))]
    with pytest.raises(DataError, match="coincident"):
        build_weight_matrix(regions, INVERSE_DISTANCE)


def test_haversine_symmetric():
    a, b = (121.47, 31.23), (118.80, 32.06)
    assert haversine_km(a, b) == pytest.approx(haversine_km(b, a))
    assert 260 < haversine_km(a, b) < 280


def test_weight_matrix_invariants():
    with pytest.raises(DataError):
        WeightMatrix(BINARY_CONTIGUITY, np.array([[1.0, 0], [0, 0]]), False, ("a", "b"))
    with pytest.raises(DataError):
        WeightMatrix(BINARY_CONTIGUITY, np.array([[0, -1.0], [1, 0]]), False, ("a", "b"))
