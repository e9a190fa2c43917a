import json

from regionscope import fixtures, synthetic


def test_fixture_regenerates_identically(tmp_path):
    synthetic.write_yrd_fixture(tmp_path, seed=1)
    bundled = fixtures.yrd_config_path().parent
    for name in ("schema.json", "panel.csv", "counties.csv", "config.json"):
        assert (tmp_path / name).read_bytes() == (bundled / name).read_bytes(), name


def test_schema_shape():
    doc = synthetic.yrd_schema()
    cities = [r for r in doc["regions"] if r.get("level", "city") == "city"]
    counties = [r for r in doc["regions"] if r.get("level") == "county"]
    assert len(cities) == 41 and len(counties) == 40
    assert len(doc["indicators"]) == len(synthetic.INDICATORS)
    for r in cities:
        assert all(r["id"] in next(c for c in cities if c["id"] == n)["neighbors"] for n in r["neighbors"])
    json.dumps(doc)


def test_reference_tables_load():
    names, groups, by_year = fixtures.coupling_by_year()
    assert len(names) == 41 and sorted(by_year) == synthetic.YEARS
    assert len(fixtures.shortboard_sweep()) == 15
    assert len(fixtures.county_shortboards()) == 40
    assert [r["year"] for r in fixtures.theil_by_year()][0] == 2017
