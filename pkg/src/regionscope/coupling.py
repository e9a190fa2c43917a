"""Coupling coordination between two subsystem scores and its stage taxonomy."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Band:
    lower: float
    upper: float
    type_label: str
    stage_label: str


@dataclass(frozen=True)
class StageTaxonomy:
    """Half-open bands [lower, upper) partitioning [0, 1]; the last band is closed at 1."""

    bands: tuple[Band, ...]

    def __post_init__(self):
        if not self.bands:
            raise DataError("taxonomy has no bands")
        if self.bands[0].lower != 0.0 or self.bands[-1].upper != 1.0:
            raise DataError("taxonomy bands must cover [0, 1]")
        for a, b in zip(self.bands, self.bands[1:]):
            if a.upper != b.lower:
                raise DataError(f"taxonomy gap or overlap at {a.upper} / {b.lower}")
        for b in self.bands:
            if not b.lower < b.upper:
                raise DataError(f"empty taxonomy band [{b.lower}, {b.upper})")

    def classify(self, d: float) -> tuple[str, str]:
        if not 0.0 <= d <= 1.0:
            raise DataError(f"coordination degree {d} outside [0, 1]")
        for band in self.bands:
            if band.lower <= d < band.upper:
                return band.type_label, band.stage_label
        last = self.bands[-1]
        return last.type_label, last.stage_label


DEFAULT_TAXONOMY = StageTaxonomy((
    Band(0.0, 0.3, "severe disharmony and decline", "low-level coupling"),
    Band(0.3, 0.4, "mild disharmony and decline", "antagonism"),
    Band(0.4, 0.5, "close to disharmony and decline", "antagonism"),
    Band(0.5, 0.6, "close to harmonious development", "preliminary synergy"),
    Band(0.6, 0.7, "moderate harmonious development", "preliminary synergy"),
    Band(0.7, 0.8, "good harmonious development", "preliminary synergy"),
    Band(0.8, 1.0, "excellent harmonious development", "high-level coupling"),
))


def _check_unit(name: str, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DataError(f"{name}={x} outside [0, 1]")
    return x


def coupling_degree(s1: float, s2: float) -> float:
    """C = 2 sqrt(S1 S2) / (S1 + S2); 0 when both scores are 0."""
    s1, s2 = _check_unit("S1", s1), _check_unit("S2", s2)
    total = s1 + s2
    if total == 0.0:
        return 0.0
    return 2.0 * math.sqrt(s1 * s2) / total


def coordination_degree(s1: float, s2: float, alpha: float = 0.5) -> tuple[float, float]:
    """Return (T, D) with T = alpha S1 + (1 - alpha) S2 and D = sqrt(C T)."""
    alpha = _check_unit("alpha", alpha)
    c = coupling_degree(s1, s2)
    t = alpha * s1 + (1.0 - alpha) * s2
    return t, math.sqrt(c * t)


def classify_stage(d: float, taxonomy: StageTaxonomy = DEFAULT_TAXONOMY) -> tuple[str, str]:
    return taxonomy.classify(d)


def generalized_coupling_degree(scores: Sequence[float]) -> float:
    """Experimental n-subsystem form: geometric mean / arithmetic mean.

    Not used by the pipeline; reduces to :func:`coupling_degree` for n = 2.
    """
    s = np.array([_check_unit(f"S{k + 1}", x) for k, x in enumerate(scores)])
    if s.size == 0:
        raise DataError("need at least one subsystem score")
    mean = s.mean()
    if mean == 0.0:
        return 0.0
    return float(np.prod(s) ** (1.0 / s.size) / mean)


@dataclass(frozen=True)
class CouplingRecord:
    region_id: str
    year: int
    S1: float
    S2: float
    C: float
    Tc: float
    D: float
    type_label: str
    stage: str


def couple(
    region_ids: Sequence[str],
    years: Sequence[int],
    s1: np.ndarray,
    s2: np.ndarray,
    alpha: float = 0.5,
    taxonomy: StageTaxonomy = DEFAULT_TAXONOMY,
) -> list[CouplingRecord]:
    """Coupling records for every region-year of two region x year score grids."""
    s1, s2 = np.asarray(s1, dtype=float), np.asarray(s2, dtype=float)
    if s1.shape != s2.shape or s1.shape != (len(region_ids), len(years)):
        raise DataError("subsystem score grids do not match regions x years")
    records = []
    for i, rid in enumerate(region_ids):
        for t, year in enumerate(years):
            a, b = float(s1[i, t]), float(s2[i, t])
            c = coupling_degree(a, b)
            tc, d = coordination_degree(a, b, alpha)
            type_label, stage = taxonomy.classify(d)
            records.append(CouplingRecord(rid, int(year), a, b, c, tc, d, type_label, stage))
    return records


def d_grid(records: Sequence[CouplingRecord], region_ids: Sequence[str], years: Sequence[int]) -> np.ndarray:
    """Region x year matrix of D values from a record list."""
    pos = {(r.region_id, r.year): r.D for r in records}
    return np.array([[pos[(rid, int(y))] for y in years] for rid in region_ids])
