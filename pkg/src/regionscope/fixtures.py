"""Bundled data: the synthetic YRD-shaped run and published table values.

The published tables are transcriptions used for identity checks; they are
never fed to the estimators.
"""
from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

YRD_DIR = "yrd_synthetic"
REFERENCE_DIR = "reference"


def data_path(*parts: str) -> Path:
    return Path(str(resources.files("regionscope").joinpath("data", *parts)))


def yrd_config_path() -> Path:
    return data_path(YRD_DIR, "config.json")


def _rows(name: str) -> list[dict[str, str]]:
    with open(data_path(REFERENCE_DIR, name), newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _floats(row: dict[str, str], skip: tuple[str, ...]) -> dict[str, float]:
    return {k: float(v) for k, v in row.items() if k not in skip}


def coupling_by_year() -> tuple[list[str], list[str], dict[int, list[float]]]:
    """City names, their groups, and D for each year (41 cities x 2017-2021)."""
    rows = _rows("coupling_by_city.csv")
    years = [k for k in rows[0] if k.isdigit()]
    return ([r["city"] for r in rows], [r["group"] for r in rows],
            {int(y): [float(r[y]) for r in rows] for y in years})


def theil_by_year() -> list[dict[str, float]]:
    """Rows keyed as in the file; shares are fractions of the total."""
    return [_floats(r, ()) for r in _rows("theil_by_year.csv")]


def theil_by_dimension_2021() -> list[dict]:
    """Rows keyed as in the file; contribution shares are percentages."""
    return [{"dimension": r["dimension"], **_floats(r, ("dimension",))}
            for r in _rows("theil_by_dimension.csv")]


def shortboard_sweep() -> list[dict[str, float]]:
    return [_floats(r, ()) for r in _rows("shortboard_sweep.csv")]


def county_shortboards() -> list[dict]:
    return [{"county": r["county"], **_floats(r, ("county",))} for r in _rows("county_shortboards.csv")]
