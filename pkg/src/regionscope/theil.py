"""Share-based Theil index with between/within group decomposition."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupTerm:
    group: Hashable
    m_k: int
    p_k: float
    T_k: float
    contribution: float  # p_k T_k / T


@dataclass(frozen=True)
class TheilDecomposition:
    T_total: float
    T_between: float
    T_within: float
    groups: tuple[GroupTerm, ...]
    m: int

    @property
    def between_contribution(self) -> float:
        return self.T_between / self.T_total if self.T_total > 0 else 0.0

    @property
    def within_contribution(self) -> float:
        return self.T_within / self.T_total if self.T_total > 0 else 0.0

    def group(self, key: Hashable) -> GroupTerm:
        for g in self.groups:
            if g.group == key:
                return g
        raise KeyError(key)


def shares_from_scores(scores: Sequence[float]) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    if (s < 0).any():
        raise DataError("scores must be non-negative")
    total = s.sum()
    if total <= 0:
        raise DataError("all scores are zero; shares undefined")
    return s / total


def _xlogx_ratio(x: float, ref: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(x / ref)


def theil_index(x: Sequence[float], groups: Sequence[Hashable]) -> TheilDecomposition:
    """Decompose T = T_b + sum_k p_k T_k for shares ``x`` summing to one.

    ``groups[i]`` is the group key of unit ``i``; groups keep first-seen order.
    ``T_total`` is summed directly over units, so the decomposition identity
    is a check rather than a definition.
    """
    x = np.asarray(x, dtype=float)
    if len(groups) != x.size:
        raise DataError("every unit needs a group")
    if (x < 0).any():
        raise DataError("negative share")
    if abs(x.sum() - 1.0) > 1e-6:
        raise DataError(f"shares sum to {x.sum()}, expected 1")
    m = x.size
    members: dict[Hashable, list[int]] = {}
    for i, g in enumerate(groups):
        members.setdefault(g, []).append(i)

    t_total = math.fsum(_xlogx_ratio(float(xi), 1.0 / m) for xi in x)
    t_between = 0.0
    terms = []
    for g, idx in members.items():
        m_k = len(idx)
        p_k = math.fsum(float(x[i]) for i in idx)
        if p_k == 0.0:
            log.warning("group %r has zero total share; excluded", g)
            terms.append((g, m_k, 0.0, 0.0))
            continue
        t_k = math.fsum(_xlogx_ratio(float(x[i]) / p_k, 1.0 / m_k) for i in idx)
        t_between += _xlogx_ratio(p_k, m_k / m)
        terms.append((g, m_k, p_k, t_k))
    t_within = math.fsum(p * t for _, _, p, t in terms)
    if t_total > math.log(m) + 1e-12:
        raise DataError(f"Theil index {t_total} exceeds ln(m) = {math.log(m)}")
    groups_out = tuple(
        GroupTerm(g, m_k, p_k, t_k, p_k * t_k / t_total if t_total > 0 else 0.0)
        for g, m_k, p_k, t_k in terms
    )
    return TheilDecomposition(t_total, t_between, t_within, groups_out, m)


def theil_from_scores(scores: Sequence[float], groups: Sequence[Hashable]) -> TheilDecomposition:
    return theil_index(shares_from_scores(scores), groups)


def theil_by_dimension(
    score_table, year: int, groups: Mapping[str, Hashable] | Sequence[Hashable]
) -> dict[str, TheilDecomposition]:
    """One decomposition per first-level dimension for ``year``, plus ``"overall"``."""
    t = score_table.year_index(year)
    if isinstance(groups, Mapping):
        try:
            labels = [groups[r] for r in score_table.region_ids]
        except KeyError as exc:
            raise DataError(f"region {exc.args[0]!r} has no group") from None
    else:
        labels = list(groups)
    if not score_table.dimensions:
        raise DataError("score table has no dimension columns")
    out = {}
    for dim in score_table.dimensions:
        out[dim] = theil_from_scores(score_table.dimension(dim)[:, t], labels)
    out["overall"] = theil_from_scores(score_table.composite[:, t], labels)
    return out
