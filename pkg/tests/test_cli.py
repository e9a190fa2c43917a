import csv
import json
import shutil

import numpy as np
import pytest

from regionscope import cli, fixtures
from regionscope import convergence as cv
from regionscope.errors import ConfigError
from regionscope.pipeline import build_config, load_config, parse_override, read_county_matrix

CFG = str(fixtures.yrd_config_path())


@pytest.fixture
def fixture_copy(tmp_path):
    dst = tmp_path / "data"
    shutil.copytree(fixtures.yrd_config_path().parent, dst)
    return dst


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


@pytest.mark.parametrize("stage, files", [
    ("ingest", {"ingest.json"}),
    ("score", {"scores.csv", "scores.json"}),
    ("coupling", {"coupling.csv", "coupling_stage_counts.csv"}),
    ("moran", {"moran.csv"}),
    ("lisa", {"lisa.csv"}),
    ("theil", {"theil.csv", "theil_dimensions_2021.csv"}),
    ("shortboard", {"shortboard_sweep.csv", "shortboard_counties.csv", "shortboard.json"}),
    ("converge", {"convergence.csv", "convergence.json"}),
])
def test_each_subcommand(tmp_path, capsys, stage, files):
    code, io = _run(capsys, stage, "--config", CFG, "--out", str(tmp_path), "--set", "spatial.permutations=99")
    assert code == 0, io.err
    written = {p.name for p in tmp_path.iterdir()}
    assert files | {"manifest.json"} <= written
    assert "wrote" in io.out


def test_coupling_csv_layout(tmp_path):
    assert cli.main(["coupling", "--config", CFG, "--out", str(tmp_path)]) == 0
    with open(tmp_path / "coupling.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["region_id", "year", "S1", "S2", "C", "T", "D", "type", "stage"]
    assert len(rows) == 1 + 41 * 5
    for r in rows[1:]:
        c, t, d = map(float, r[4:7])
        assert 0 <= d <= 1 and d == pytest.approx((c * t) ** 0.5, abs=2e-4)


def test_unknown_key_is_config_error(tmp_path, capsys):
    code, io = _run(capsys, "score", "--config", CFG, "--out", str(tmp_path), "--set", "spatial.bogus=1")
    assert code == 2
    assert "spatial.bogus" in io.err


def test_threshold_length_mismatch(tmp_path, capsys):
    code, io = _run(capsys, "shortboard", "--config", CFG, "--out", str(tmp_path),
                    "--set", "shortboard.thresholds=[0.5,0.5]")
    assert code != 0
    assert "shortboard.thresholds" in io.err
    assert not (tmp_path / "shortboard_sweep.csv").exists()


def test_data_error_exit_code(fixture_copy, tmp_path, capsys):
    with open(fixture_copy / "panel.csv", "a") as fh:
        fh.write("nowhere,2017,pub_edu_1,1.0\n")
    code, io = _run(capsys, "score", "--config", str(fixture_copy / "config.json"), "--out", str(tmp_path))
    assert code == 3
    assert "nowhere" in io.err


def test_numerical_error_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("Singular matrix")
    monkeypatch.setattr(cv, "ols_fe", boom)
    code, io = _run(capsys, "converge", "--config", CFG, "--out", str(tmp_path))
    assert code == 4
    assert "stage converge failed" in io.err


def test_missing_config(tmp_path, capsys):
    code, io = _run(capsys, "score", "--config", str(tmp_path / "none.yaml"))
    assert code == 2


def test_overrides_recorded(tmp_path):
    assert cli.main(["moran", "--config", CFG, "--out", str(tmp_path), "--seed", "7",
                     "--set", "spatial.permutations=49", "--set", "spatial.variable=D"]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 7
    assert manifest["config"]["spatial"]["permutations"] == 49
    assert "out" not in manifest["config"] and "threads" not in manifest["config"]
    with open(tmp_path / "moran.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["n_permutations"] for r in rows} == {"49"} and {r["seed"] for r in rows} == {"7"}


def test_geometry_adds_geojson(fixture_copy, tmp_path):
    cities = json.loads((fixture_copy / "schema.json").read_text())["regions"]
    feats = [{"type": "Feature", "properties": {"region_id": r["id"]},
              "geometry": {"type": "Point", "coordinates": [r["lon"], r["lat"]]}}
             for r in cities if r.get("level", "city") == "city"]
    (fixture_copy / "cities.geojson").write_text(json.dumps({"type": "FeatureCollection", "features": feats}))
    assert cli.main(["lisa", "--config", str(fixture_copy / "config.json"), "--out", str(tmp_path),
                     "--set", "geometry=cities.geojson", "--set", "spatial.permutations=99"]) == 0
    doc = json.loads((tmp_path / "lisa.geojson").read_text())
    assert all("2021" in f["properties"]["lisa"] for f in doc["features"])


def test_yaml_config(tmp_path, fixture_copy):
    import yaml
    doc = json.loads((fixture_copy / "config.json").read_text())
    (fixture_copy / "run.yaml").write_text(yaml.safe_dump(doc))
    cfg = load_config(fixture_copy / "run.yaml", {"threads": 2})
    assert cfg.threads == 2 and cfg["spatial.permutations"] == 999
    assert cfg.path("panel") == fixture_copy / "panel.csv"


def test_parse_override():
    assert parse_override("spatial.permutations=99") == ("spatial.permutations", 99)
    assert parse_override("shortboard.thresholds=[0.5, 0.4]") == ("shortboard.thresholds", [0.5, 0.4])
    with pytest.raises(ConfigError):
        parse_override("novalue")


def test_config_validation():
    with pytest.raises(ConfigError):
        build_config({"panel": "p.csv", "schema": "s.json", "spatial": {"permutations": 0}})
    with pytest.raises(ConfigError):
        build_config({"panel": "p.csv", "schema": "s.json", "coupling": {"alpha": 1.5}})


def test_county_matrix_reader(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("county,A,B\nk1,0.5,0.6\nk2,0.1,0.2\n")
    counties, groups, names, A = read_county_matrix(p)
    assert counties == ["k1", "k2"] and names == ["A", "B"] and A.shape == (2, 2)
    p.write_text("county,A\nk1,abc\n")
    with pytest.raises(Exception, match="non-numeric"):
        read_county_matrix(p)
