"""Panel data model, CSV/JSON ingestion and spatial weight matrices."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088

POSITIVE = "positive"
NEGATIVE = "negative"
BINARY_CONTIGUITY = "binary_contiguity"
INVERSE_DISTANCE = "inverse_distance"

PANEL_HEADER = ["region_id", "year", "indicator_id", "value"]


@dataclass(frozen=True)
class IndicatorSpec:
    id: str
    name: str
    direction: str = POSITIVE
    dimension: str = ""
    units: str = ""

    def __post_init__(self):
        if self.direction not in (POSITIVE, NEGATIVE):
            raise DataError(f"indicator {self.id!r}: unknown direction {self.direction!r}")


@dataclass(frozen=True)
class Region:
    id: str
    name: str = ""
    level: str = "city"
    parent: str | None = None
    group: str = ""
    centroid: tuple[float, float] | None = None  # (lon, lat) degrees
    neighbors: frozenset[str] | None = None

    def __post_init__(self):
        if self.level not in ("city", "county"):
            raise DataError(f"region {self.id!r}: level must be 'city' or 'county'")


@dataclass(frozen=True)
class Schema:
    dimensions: tuple[str, ...]
    indicators: tuple[IndicatorSpec, ...]
    regions: tuple[Region, ...]

    def __post_init__(self):
        _check_unique([d for d in self.dimensions], "dimension")
        _check_unique([ind.id for ind in self.indicators], "indicator")
        _check_unique([r.id for r in self.regions], "region")
        dims = set(self.dimensions)
        for ind in self.indicators:
            if ind.dimension not in dims:
                raise DataError(
                    f"indicator {ind.id!r} names undeclared dimension {ind.dimension!r}"
                )
        by_id = {r.id: r for r in self.regions}
        for r in self.regions:
            if r.level == "county":
                parent = by_id.get(r.parent) if r.parent else None
                if parent is None or parent.level != "city":
                    raise DataError(f"county {r.id!r} must name an existing city parent")
            for nb in r.neighbors or ():
                if nb not in by_id:
                    raise DataError(f"region {r.id!r} lists unknown neighbor {nb!r}")
                if r.id not in (by_id[nb].neighbors or ()):
                    raise DataError(f"neighbor relation not symmetric: {r.id!r} -> {nb!r}")

    def indicator(self, ind_id: str) -> IndicatorSpec:
        for ind in self.indicators:
            if ind.id == ind_id:
                return ind
        raise DataError(f"unknown indicator {ind_id!r}")

    def region(self, region_id: str) -> Region:
        for r in self.regions:
            if r.id == region_id:
                return r
        raise DataError(f"unknown region {region_id!r}")

    @property
    def indicator_ids(self) -> list[str]:
        return [ind.id for ind in self.indicators]

    def with_directions(self, direction: str) -> "Schema":
        inds = tuple(
            IndicatorSpec(i.id, i.name, direction, i.dimension, i.units) for i in self.indicators
        )
        return Schema(self.dimensions, inds, self.regions)

    def to_dict(self) -> dict:
        regions = []
        for r in self.regions:
            entry = {"id": r.id, "name": r.name, "level": r.level, "parent": r.parent, "group": r.group}
            if r.centroid is not None:
                entry["lon"], entry["lat"] = r.centroid
            if r.neighbors is not None:
                entry["neighbors"] = sorted(r.neighbors)
            regions.append(entry)
        return {
            "dimensions": list(self.dimensions),
            "indicators": [
                {"id": i.id, "name": i.name, "direction": i.direction,
                 "dimension": i.dimension, "units": i.units}
                for i in self.indicators
            ],
            "regions": regions,
        }


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Region x year x indicator tensor; missing cells are NaN."""

    regions: tuple[Region, ...]
    years: tuple[int, ...]
    schema: Schema
    values: np.ndarray
    parse_warnings: int = 0

    def __post_init__(self):
        years = list(self.years)
        if any(b <= a for a, b in zip(years, years[1:])):
            raise DataError("years must be strictly increasing without duplicates")
        shape = (len(self.regions), len(self.years), len(self.schema.indicators))
        if self.values.shape != shape:
            raise DataError(f"value tensor has shape {self.values.shape}, expected {shape}")
        values = np.array(self.values, dtype=float, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def region_ids(self) -> list[str]:
        return [r.id for r in self.regions]

    @property
    def indicator_ids(self) -> list[str]:
        return self.schema.indicator_ids

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())

    def replace(self, values: np.ndarray | None = None, schema: Schema | None = None) -> "PanelDataset":
        return PanelDataset(
            self.regions,
            self.years,
            schema if schema is not None else self.schema,
            values if values is not None else self.values,
        )

    def select_indicators(self, ids: Sequence[str]) -> "PanelDataset":
        """Sub-panel restricted to ``ids``; the schema keeps only the dimensions used."""
        index = {ind_id: k for k, ind_id in enumerate(self.indicator_ids)}
        missing = [i for i in ids if i not in index]
        if missing:
            raise DataError(f"unknown indicator {missing[0]!r}")
        inds = tuple(self.schema.indicator(i) for i in ids)
        dims = tuple(d for d in self.schema.dimensions if any(i.dimension == d for i in inds))
        schema = Schema(dims, inds, self.schema.regions)
        return PanelDataset(self.regions, self.years, schema, self.values[:, :, [index[i] for i in ids]])

    def select_regions(self, ids: Sequence[str]) -> "PanelDataset":
        index = {r.id: k for k, r in enumerate(self.regions)}
        rows = [index[i] for i in ids]
        return PanelDataset(
            tuple(self.regions[k] for k in rows), self.years, self.schema, self.values[rows]
        )

    def equals(self, other: "PanelDataset") -> bool:
        return (
            self.regions == other.regions
            and self.years == other.years
            and self.schema == other.schema
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    kind: str
    entries: np.ndarray
    row_standardized: bool
    region_order: tuple[str, ...]

    def __post_init__(self):
        w = np.array(self.entries, dtype=float, copy=True)
        n = len(self.region_order)
        if w.shape != (n, n):
            raise DataError(f"weight matrix shape {w.shape} does not match {n} regions")
        if (w < 0).any():
            raise DataError("weight matrix has negative entries")
        if np.any(np.diag(w) != 0):
            raise DataError("weight matrix has a nonzero diagonal")
        if self.row_standardized:
            sums = w.sum(axis=1)
            nz = sums != 0
            if np.any(np.abs(sums[nz] - 1.0) > 1e-12):
                raise DataError("row-standardized weights do not sum to one")
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)

    @property
    def n(self) -> int:
        return len(self.region_order)

    @property
    def s0(self) -> float:
        return float(self.entries.sum())

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of W (real part; W is similar to a symmetric matrix here)."""
        return spectrum(self.entries)

    def to_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return dense_to_csr(self.entries)


def spectrum(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    rows = w.sum(axis=1)
    # row-standardised symmetric matrices: W = D^-1 S, similar to D^-1/2 S D^-1/2
    if np.all(rows > 0):
        s = w * rows[:, None]
        if np.allclose(s, s.T, rtol=1e-10, atol=1e-14):
            d = 1.0 / np.sqrt(rows)
            return np.sort(np.linalg.eigvalsh(d[:, None] * s * d[None, :]))
    if np.allclose(w, w.T, rtol=1e-12, atol=0):
        return np.sort(np.linalg.eigvalsh(w))
    ev = np.linalg.eigvals(w)
    return np.sort(ev.real)


def dense_to_csr(w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = np.nonzero(w)
    indptr = np.zeros(w.shape[0] + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr, cols.astype(np.int64), np.ascontiguousarray(w[rows, cols], dtype=float)


def _check_unique(ids: Iterable[str], what: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise DataError(f"duplicate {what} id {i!r}")
        seen.add(i)


# -- schema / panel IO ---------------------------------------------------


def schema_from_dict(doc: dict) -> Schema:
    try:
        dims = tuple(str(d) for d in doc["dimensions"])
        inds = tuple(
            IndicatorSpec(
                id=str(i["id"]),
                name=str(i.get("name", i["id"])),
                direction=str(i.get("direction", POSITIVE)),
                dimension=str(i["dimension"]),
                units=str(i.get("units", "")),
            )
            for i in doc["indicators"]
        )
        regions = []
        for r in doc["regions"]:
            centroid = None
            if r.get("lon") is not None and r.get("lat") is not None:
                centroid = (float(r["lon"]), float(r["lat"]))
            nbs = r.get("neighbors")
            regions.append(
                Region(
                    id=str(r["id"]),
                    name=str(r.get("name", r["id"])),
                    level=str(r.get("level", "city")),
                    parent=r.get("parent"),
                    group=str(r.get("group", "")),
                    centroid=centroid,
                    neighbors=frozenset(str(n) for n in nbs) if nbs is not None else None,
                )
            )
    except KeyError as exc:
        raise DataError(f"schema is missing required key {exc.args[0]!r}") from None
    return Schema(dims, inds, tuple(regions))


def load_schema(path: str | Path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"schema {path} is not valid JSON: {exc}") from None
    return schema_from_dict(doc)


def load_panel(path: str | Path, schema_path: str | Path) -> PanelDataset:
    """Read a long-format panel CSV against a JSON schema.

    Empty ``value`` cells are missing; unparseable cells become missing and are
    counted in ``parse_warnings``. Only regions present in the CSV are kept,
    in schema order.
    """
    schema = load_schema(schema_path)
    region_index = {r.id: r for r in schema.regions}
    ind_index = {ind_id: k for k, ind_id in enumerate(schema.indicator_ids)}

    cells: dict[tuple[str, int, str], float] = {}
    bad = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != PANEL_HEADER:
            raise DataError(f"panel header must be {','.join(PANEL_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            rid, ind = row["region_id"].strip(), row["indicator_id"].strip()
            if rid not in region_index:
                raise DataError(f"line {lineno}: unknown region id {rid!r}")
            if ind not in ind_index:
                raise DataError(f"line {lineno}: unknown indicator id {ind!r}")
            try:
                year = int(row["year"])
            except (TypeError, ValueError):
                raise DataError(f"line {lineno}: bad year {row['year']!r}") from None
            key = (rid, year, ind)
            if key in cells:
                raise DataError(f"duplicate row for region {rid!r}, year {year}, indicator {ind!r}")
            raw = (row["value"] or "").strip()
            if raw == "":
                value = math.nan
            else:
                try:
                    value = float(raw)
                except ValueError:
                    value = math.nan
                    bad += 1
                if not math.isfinite(value):
                    if not math.isnan(value):
                        bad += 1
                    value = math.nan
            cells[key] = value
    if bad:
        log.warning("%d unparseable panel cells treated as missing", bad)

    present = {k[0] for k in cells}
    regions = tuple(r for r in schema.regions if r.id in present)
    years = tuple(sorted({k[1] for k in cells}))
    values = np.full((len(regions), len(years), len(ind_index)), np.nan)
    r_pos = {r.id: k for k, r in enumerate(regions)}
    y_pos = {y: k for k, y in enumerate(years)}
    for (rid, year, ind), v in cells.items():
        values[r_pos[rid], y_pos[year], ind_index[ind]] = v
    return PanelDataset(regions, years, schema, values, parse_warnings=bad)


def save_panel(panel: PanelDataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PANEL_HEADER)
        for i, r in enumerate(panel.regions):
            for t, year in enumerate(panel.years):
                for j, ind in enumerate(panel.indicator_ids):
                    v = panel.values[i, t, j]
                    writer.writerow([r.id, year, ind, "" if np.isnan(v) else repr(float(v))])


def save_schema(schema: Schema, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2) + "\n", encoding="utf-8")


# -- spatial weights -------------------------------------------------------


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    lon1, lat1 = map(math.radians, a)
    lon2, lat2 = map(math.radians, b)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(1.0, h)))


def row_normalize(w: np.ndarray) -> np.ndarray:
    sums = w.sum(axis=1, keepdims=True)
    return np.divide(w, sums, out=np.zeros_like(w), where=sums != 0)


def build_weight_matrix(
    regions: Sequence[Region], kind: str = BINARY_CONTIGUITY, row_standardize: bool = True
) -> WeightMatrix:
    """Contiguity (W_ij = 1 for neighbours) or inverse great-circle distance weights.

    Neighbours outside ``regions`` are ignored, so a city-only matrix can be
    built from a schema that also lists counties.
    """
    ids = [r.id for r in regions]
    pos = {rid: k for k, rid in enumerate(ids)}
    n = len(ids)
    w = np.zeros((n, n))
    if kind == BINARY_CONTIGUITY:
        missing = [r.id for r in regions if r.neighbors is None]
        if missing:
            raise DataError(f"contiguity weights need neighbors for {', '.join(missing)}")
        for i, r in enumerate(regions):
            for nb in r.neighbors:
                if nb in pos:
                    w[i, pos[nb]] = 1.0
        islands = [ids[i] for i in range(n) if not w[i].any()]
        if islands:
            raise DataError(f"island regions without neighbors: {', '.join(islands)}")
        if not np.array_equal(w, w.T):
            raise DataError("contiguity relation is not symmetric")
    elif kind == INVERSE_DISTANCE:
        missing = [r.id for r in regions if r.centroid is None]
        if missing:
            raise DataError(f"inverse-distance weights need centroids for {', '.join(missing)}")
        for i in range(n):
            for j in range(i + 1, n):
                d = haversine_km(regions[i].centroid, regions[j].centroid)
                if d <= 0:
                    raise DataError(f"coincident centroids for {ids[i]!r} and {ids[j]!r}")
                w[i, j] = w[j, i] = 1.0 / d
    else:
        raise DataError(f"unknown weight kind {kind!r}")
    if row_standardize:
        w = row_normalize(w)
    return WeightMatrix(kind, w, row_standardize, tuple(ids))
