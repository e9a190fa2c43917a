import json
import math
import os

import numpy as np
import pytest

from regionscope.errors import DataError, RegionScopeError
from regionscope.report import (csv_text, emit_table, format_number, json_text, verify_manifest,
                                write_manifest)


@pytest.mark.parametrize("x, s", [
    (0.12345, "0.1234"),
    (0.12355, "0.1236"),
    (2.5e-5, "0.0000"),
    (-1e-7, "0.0000"),
    (1.0, "1.0000"),
    (-3.14159, "-3.1416"),
    (math.nan, "NA"),
    (math.inf, "Inf"),
    (-math.inf, "-Inf"),
])
def test_format_number(x, s):
    assert format_number(x) == s


def test_csv_cells():
    text = csv_text(["a", "b", "c", "d"], [[1, 0.5, True, "x,y"]])
    assert text == 'a,b,c,d\n1,0.5000,1,"x,y"\n'
    with pytest.raises(DataError):
        csv_text(["a"], [[1, 2]])


def test_json_nulls_for_non_finite():
    doc = json.loads(json_text({"a": math.nan, "b": [np.float64(1.5), np.inf], "c": np.int64(3)}))
    assert doc == {"a": None, "b": [1.5, None], "c": 3}


def test_emit_writes_lf(tmp_path):
    p = emit_table([[1, 2.0]], tmp_path / "sub" / "t.csv", header=["a", "b"])
    assert b"\r" not in p.read_bytes()
    with pytest.raises(DataError):
        emit_table([[1]], tmp_path / "t.csv")
    with pytest.raises(DataError):
        emit_table([[1]], tmp_path / "t.xml", fmt="xml")


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root ignores permissions")
def test_unwritable_path(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    with pytest.raises(RegionScopeError, match="cannot write"):
        emit_table({"a": 1}, locked / "x.json", fmt="json")


def test_write_into_file_path_fails(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(RegionScopeError, match="cannot write"):
        emit_table({"a": 1}, blocker / "x.json", fmt="json")


def test_manifest_round_trip_and_tamper(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("x\n")
    out = tmp_path / "out"
    a = emit_table([[1]], out / "a.csv", header=["v"])
    b = emit_table({"k": 2}, out / "b.json", fmt="json")
    write_manifest(out, {"panel": src}, {"seed": 1}, {"score": [a, b]})
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["inputs"]["panel"]["file"] == "in.csv"
    assert [f["path"] for f in doc["artifacts"][0]["files"]] == ["a.csv", "b.json"]
    assert verify_manifest(out) == []
    a.write_text("v\n2\n")
    b.unlink()
    problems = verify_manifest(out)
    assert any("a.csv" in p and "checksum" in p for p in problems)
    assert any("b.json" in p and "missing" in p for p in problems)
    (out / "manifest.json").write_text("{")
    assert verify_manifest(out)[0].startswith("unreadable")
