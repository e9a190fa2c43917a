"""Cleaning, normalisation and entropy-weighted aggregation of indicator panels.

Order of operations in :func:`score_panel`::

    impute_missing -> reverse_negative -> winsorize -> efficacy scores
        -> pooled entropy weights -> composite / dimension scores
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError
from .panel import NEGATIVE, POSITIVE, PanelDataset

log = logging.getLogger(__name__)

QUANTILE_METHOD = "linear"


@dataclass(frozen=True)
class EfficacyBounds:
    indicator: str
    x_l: float
    x_h: float
    shift: float = 0.0  # added to raw values before bounding (negative-valued indicators)

    def __post_init__(self):
        if not self.x_h > self.x_l:
            raise DataError(f"indicator {self.indicator!r}: degenerate bounds {self.x_l} >= {self.x_h}")


@dataclass(frozen=True, eq=False)
class WeightVector:
    ids: tuple[str, ...]
    values: np.ndarray
    method: str = "entropy"

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (len(self.ids),):
            raise DataError("weight vector length does not match its ids")
        if (v < 0).any() or abs(v.sum() - 1.0) > 1e-12:
            raise DataError("weights must be non-negative and sum to one")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def as_dict(self) -> dict[str, float]:
        return {k: float(x) for k, x in zip(self.ids, self.values)}


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Per region-year indicator, dimension and composite scores on a 0-100 scale."""

    region_ids: tuple[str, ...]
    years: tuple[int, ...]
    indicator_ids: tuple[str, ...]
    dimensions: tuple[str, ...]
    indicator_scores: np.ndarray  # region x year x indicator
    dimension_scores: np.ndarray  # region x year x dimension
    composite: np.ndarray  # region x year
    weights: WeightVector | None = None
    bounds: Mapping[str, EfficacyBounds] = field(default_factory=dict)

    @property
    def subsystem(self) -> np.ndarray:
        """Composite rescaled to [0, 1]."""
        return self.composite / 100.0

    def dimension(self, name: str) -> np.ndarray:
        try:
            k = self.dimensions.index(name)
        except ValueError:
            raise DataError(f"score table has no dimension {name!r}") from None
        return self.dimension_scores[:, :, k]

    def year_index(self, year: int) -> int:
        try:
            return self.years.index(year)
        except ValueError:
            raise DataError(f"score table has no year {year}") from None


# -- cleaning ---------------------------------------------------------------


def _fill_series(years: np.ndarray, s: np.ndarray) -> np.ndarray:
    obs = ~np.isnan(s)
    out = s.copy()
    first, last = np.flatnonzero(obs)[[0, -1]]
    inner = np.arange(first, last + 1)
    gaps = inner[~obs[inner]]
    if gaps.size:
        out[gaps] = np.interp(years[gaps], years[obs], s[obs])
    edge = np.isnan(out)
    if edge.any():
        out[edge] = s[obs].mean()
    return out


def impute_missing(panel: PanelDataset) -> PanelDataset:
    """Linear interpolation inside each series, region mean at the edges.

    A series with no observation at all takes the cross-region mean of the
    indicator in each year (or the pooled indicator mean for empty years).
    """
    vals = np.array(panel.values, dtype=float)
    years = np.asarray(panel.years, dtype=float)
    for j, ind in enumerate(panel.indicator_ids):
        col = vals[:, :, j]
        if np.isnan(col).all():
            raise DataError(f"indicator {ind!r} is missing for every region and year")
        year_mean = np.array([
            np.nanmean(col[:, t]) if not np.isnan(col[:, t]).all() else np.nan
            for t in range(col.shape[1])
        ])
        year_mean[np.isnan(year_mean)] = np.nanmean(col)
        filled = col.copy()
        for i in range(col.shape[0]):
            s = col[i]
            if not np.isnan(s).any():
                continue
            if np.isnan(s).all():
                log.warning("series %s/%s entirely missing; using cross-region year means",
                            panel.regions[i].id, ind)
                filled[i] = year_mean
            else:
                filled[i] = _fill_series(years, s)
        vals[:, :, j] = filled
    return panel.replace(values=vals)


def reflect(values: np.ndarray) -> np.ndarray:
    """x -> max + min - x over the whole array (an involution)."""
    values = np.asarray(values, dtype=float)
    return (values.max() + values.min()) - values


def reverse_negative(panel: PanelDataset) -> PanelDataset:
    if np.isnan(panel.values).any():
        raise DataError("reverse_negative needs an imputed panel (missing values present)")
    vals = np.array(panel.values, dtype=float)
    for j, ind in enumerate(panel.schema.indicators):
        if ind.direction == NEGATIVE:
            vals[:, :, j] = reflect(vals[:, :, j])
    return panel.replace(values=vals, schema=panel.schema.with_directions(POSITIVE))


def winsorize(
    panel: PanelDataset, lower_q: float = 0.05, upper_q: float = 0.95
) -> tuple[PanelDataset, dict[str, EfficacyBounds]]:
    """Clamp each indicator into its pooled [lower_q, upper_q] quantile range.

    Indicators with negative values are first shifted by ``-min`` so the
    power-function score stays monotone.
    """
    if not 0.0 <= lower_q < upper_q <= 1.0:
        raise DataError(f"quantiles must satisfy 0 <= lower < upper <= 1, got {lower_q}, {upper_q}")
    if np.isnan(panel.values).any():
        raise DataError("winsorize needs an imputed panel (missing values present)")
    vals = np.array(panel.values, dtype=float)
    bounds = {}
    for j, ind in enumerate(panel.indicator_ids):
        col = vals[:, :, j]
        shift = -col.min() if col.min() < 0 else 0.0
        col = col + shift
        lo, hi = np.quantile(col.ravel(), [lower_q, upper_q], method=QUANTILE_METHOD)
        if not hi > lo:
            raise DataError(f"indicator {ind!r} is constant between its quantile bounds")
        bounds[ind] = EfficacyBounds(ind, float(lo), float(hi), float(shift))
        vals[:, :, j] = np.clip(col, lo, hi)
    return panel.replace(values=vals), bounds


def efficacy_score(x, bounds: EfficacyBounds):
    """Power-function score (x^2 - x_l^2) / (x_h^2 - x_l^2) * 100."""
    x = np.asarray(x, dtype=float)
    if np.any(x < bounds.x_l) or np.any(x > bounds.x_h):
        raise DataError(f"indicator {bounds.indicator!r}: value outside [{bounds.x_l}, {bounds.x_h}]")
    d = (x * x - bounds.x_l ** 2) / (bounds.x_h ** 2 - bounds.x_l ** 2) * 100.0
    return float(d) if d.ndim == 0 else d


def efficacy_scores(panel: PanelDataset, bounds: Mapping[str, EfficacyBounds]) -> np.ndarray:
    out = np.empty_like(panel.values)
    for j, ind in enumerate(panel.indicator_ids):
        out[:, :, j] = efficacy_score(panel.values[:, :, j], bounds[ind])
    return out


# -- weighting --------------------------------------------------------------


def _as_matrix(scores) -> np.ndarray:
    a = np.asarray(scores, dtype=float)
    if a.ndim == 3:
        a = a.reshape(-1, a.shape[-1])
    if a.ndim != 2:
        raise DataError("weighting needs a 2-D observations x indicators matrix")
    return a


def entropy_weights(scores, ids: Sequence[str] | None = None) -> WeightVector:
    """Entropy weights over a (pooled) observations x indicators matrix.

    A 3-D region x year x indicator array is pooled over years first.
    """
    a = _as_matrix(scores)
    n, k = a.shape
    ids = tuple(ids) if ids is not None else tuple(f"x{j + 1}" for j in range(k))
    if n < 2:
        raise DataError("entropy weights need at least two observations")
    if (a < 0).any() or np.isnan(a).any():
        raise DataError("entropy weights need non-negative, non-missing scores")
    colsum = a.sum(axis=0)
    zero = np.flatnonzero(colsum == 0)
    if zero.size:
        raise DataError(f"indicator {ids[zero[0]]!r} has an all-zero column")
    p = a / colsum
    plogp = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    e = -plogp.sum(axis=0) / np.log(n)
    # constant columns carry no information: pin e_j to exactly 1
    e[np.ptp(a, axis=0) == 0] = 1.0
    div = np.clip(1.0 - e, 0.0, None)
    if div.sum() <= 0:
        log.warning("no indicator has entropy divergence; falling back to uniform weights")
        return WeightVector(ids, np.full(k, 1.0 / k), "entropy")
    return WeightVector(ids, div / div.sum(), "entropy")


def cv_weights(scores, ids: Sequence[str] | None = None) -> WeightVector:
    """Coefficient-of-variation weights: std / mean, normalised to sum to one."""
    a = _as_matrix(scores)
    k = a.shape[1]
    ids = tuple(ids) if ids is not None else tuple(f"x{j + 1}" for j in range(k))
    mean = a.mean(axis=0)
    if np.any(mean <= 0):
        bad = ids[int(np.flatnonzero(mean <= 0)[0])]
        raise DataError(f"indicator {bad!r} has non-positive mean; CV weight undefined")
    cv = a.std(axis=0) / mean
    if cv.sum() <= 0:
        log.warning("all indicators constant; falling back to uniform weights")
        return WeightVector(ids, np.full(k, 1.0 / k), "coefficient_of_variation")
    return WeightVector(ids, cv / cv.sum(), "coefficient_of_variation")


def blended_weights(scores, ids: Sequence[str] | None = None) -> WeightVector:
    """Arithmetic mean of entropy and CV weights, renormalised."""
    e = entropy_weights(scores, ids)
    c = cv_weights(scores, ids)
    v = (e.values + c.values) / 2.0
    return WeightVector(e.ids, v / v.sum(), "blended")


WEIGHTING = {
    "entropy": entropy_weights,
    "coefficient_of_variation": cv_weights,
    "blended": blended_weights,
}


# -- aggregation ------------------------------------------------------------


def weighted_sum(scores: np.ndarray, weights) -> np.ndarray:
    """Linear in ``weights``; no renormalisation."""
    return np.asarray(scores, dtype=float) @ np.asarray(weights, dtype=float)


def composite_scores(
    scores: np.ndarray,
    weights: WeightVector | np.ndarray,
    dimensions_of: Sequence[str],
    *,
    region_ids: Sequence[str] = (),
    years: Sequence[int] = (),
    indicator_ids: Sequence[str] = (),
    bounds: Mapping[str, EfficacyBounds] | None = None,
) -> ScoreTable:
    """Composite (weighted sum) and per-dimension scores.

    ``dimensions_of[j]`` names the dimension of indicator ``j``. Dimension
    scores use the weights renormalised within the dimension; a dimension
    whose weights are all zero gets equal weights.
    """
    d = np.asarray(scores, dtype=float)
    w = weights.values if isinstance(weights, WeightVector) else np.asarray(weights, dtype=float)
    if w.shape != (d.shape[-1],):
        raise DataError("weights do not cover every indicator")
    dims = tuple(dict.fromkeys(dimensions_of))
    dim_scores = np.empty(d.shape[:-1] + (len(dims),))
    labels = np.asarray(dimensions_of)
    for k, dim in enumerate(dims):
        cols = np.flatnonzero(labels == dim)
        wd = w[cols]
        wd = wd / wd.sum() if wd.sum() > 0 else np.full(cols.size, 1.0 / cols.size)
        dim_scores[..., k] = weighted_sum(d[..., cols], wd)
    return ScoreTable(
        region_ids=tuple(region_ids),
        years=tuple(years),
        indicator_ids=tuple(indicator_ids),
        dimensions=dims,
        indicator_scores=d,
        dimension_scores=dim_scores,
        composite=weighted_sum(d, w),
        weights=weights if isinstance(weights, WeightVector) else None,
        bounds=dict(bounds or {}),
    )


def score_panel(
    panel: PanelDataset,
    lower_q: float = 0.05,
    upper_q: float = 0.95,
    weighting: str = "entropy",
) -> ScoreTable:
    """Full cleaning and scoring pipeline for one indicator subsystem."""
    if weighting not in WEIGHTING:
        raise DataError(f"unknown weighting method {weighting!r}")
    clean = reverse_negative(impute_missing(panel))
    clamped, bounds = winsorize(clean, lower_q, upper_q)
    d = efficacy_scores(clamped, bounds)
    weights = WEIGHTING[weighting](d, panel.indicator_ids)
    return composite_scores(
        d,
        weights,
        [ind.dimension for ind in panel.schema.indicators],
        region_ids=panel.region_ids,
        years=panel.years,
        indicator_ids=panel.indicator_ids,
        bounds=bounds,
    )
