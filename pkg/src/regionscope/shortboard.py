"""Dual-cutoff (Alkire-Foster style) identification of weak counties.

Notation follows the county matrix ``A`` (m counties x n indicators), the
per-indicator thresholds ``X``, the indicator weights ``Y`` and the
aggregate cutoff ``Q``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ShortboardConfig:
    thresholds: np.ndarray
    weights: np.ndarray
    cutoff: float = 0.5

    def __post_init__(self):
        x = np.asarray(self.thresholds, dtype=float)
        y = np.asarray(self.weights, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise DataError("thresholds and weights must be vectors of equal length")
        _check_weights(y)
        if not 0.0 < self.cutoff <= 1.0:
            raise DataError(f"cutoff {self.cutoff} outside (0, 1]")
        object.__setattr__(self, "thresholds", x)
        object.__setattr__(self, "weights", y)


@dataclass(frozen=True, eq=False)
class ShortboardResult:
    A: np.ndarray | None
    B: np.ndarray
    weights: np.ndarray
    cutoff: float
    weak: np.ndarray  # f, 0/1 per county
    censored: np.ndarray
    Z: np.ndarray
    U: float
    T_af: float
    M: float

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def n_weak(self) -> int:
        return int(self.weak.sum())


def _check_weights(y: np.ndarray) -> None:
    if (y < 0).any() or abs(y.sum() - 1.0) > 1e-12:
        raise DataError("indicator weights must be non-negative and sum to one")


def default_thresholds(A: np.ndarray) -> np.ndarray:
    """Column medians of the county matrix."""
    return np.median(np.asarray(A, dtype=float), axis=0)


def deprivation_matrix(A: np.ndarray, X: Sequence[float]) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    if A.ndim != 2 or X.shape != (A.shape[1],):
        raise DataError(f"threshold vector has length {X.size}, matrix has {A.shape[-1]} columns")
    return (A < X).astype(np.int8)


def identify_weak(B: np.ndarray, Y: Sequence[float], Q: float) -> np.ndarray:
    """f_i = 1 iff B_i . Y > Q (strict)."""
    Y = np.asarray(Y, dtype=float)
    _check_weights(Y)
    return (np.asarray(B, dtype=float) @ Y > Q).astype(np.int8)


def censor(B: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Zero the deprivation rows of counties not identified as weak."""
    return np.asarray(B) * np.asarray(f)[:, None].astype(np.asarray(B).dtype)


def shortboard_indices(
    B: np.ndarray, Y: Sequence[float], Q: float, m: int | None = None, A: np.ndarray | None = None
) -> ShortboardResult:
    B = np.asarray(B, dtype=np.int8)
    Y = np.asarray(Y, dtype=float)
    m = B.shape[0] if m is None else int(m)
    if m <= 0:
        raise DataError("need at least one county")
    f = identify_weak(B, Y, Q)
    cens = censor(B, f)
    Z = cens @ Y
    n_weak = int(f.sum())
    U = n_weak / m
    if n_weak == 0:
        log.warning("no county identified as weak at Q=%s", Q)
        T_af = 0.0
    else:
        T_af = float(Z.sum()) / n_weak
    return ShortboardResult(A, B, Y, float(Q), f, cens, Z, U, T_af, U * T_af)


def run_shortboard(
    A: np.ndarray, X: Sequence[float] | None = None, Y: Sequence[float] | None = None, Q: float = 0.5
) -> ShortboardResult:
    A = np.asarray(A, dtype=float)
    X = default_thresholds(A) if X is None else X
    Y = np.full(A.shape[1], 1.0 / A.shape[1]) if Y is None else Y
    cfg = ShortboardConfig(X, Y, Q)
    return shortboard_indices(deprivation_matrix(A, cfg.thresholds), cfg.weights, cfg.cutoff, A=A)


def decompose(result: ShortboardResult, by: str | Sequence[Hashable] = "indicator") -> dict:
    """Contribution shares of indicators, or of region groups when ``by`` is a label sequence.

    Both share sets sum to one when M > 0; empty when M = 0.
    """
    if result.M <= 0:
        log.warning("shortboard index is zero; contributions undefined")
        return {}
    total = float(result.Z.sum())
    if isinstance(by, str):
        if by != "indicator":
            raise DataError(f"unknown decomposition {by!r}")
        per = result.weights * result.censored.sum(axis=0)
        return {j: float(v / total) for j, v in enumerate(per)}
    labels = list(by)
    if len(labels) != result.m:
        raise DataError("every county needs a group label")
    out = {}
    for g in dict.fromkeys(labels):
        rows = np.array([lab == g for lab in labels])
        m_g = int(rows.sum())
        M_g = float(result.Z[rows].sum()) / m_g
        out[g] = (m_g / result.m) * M_g / result.M
    return out


@dataclass(frozen=True)
class SweepRow:
    Q: float
    U: float
    count: int
    T_af: float
    M: float


def threshold_sweep(
    A: np.ndarray,
    Y: Sequence[float],
    Q_values: Sequence[float],
    X: Sequence[float] | None = None,
    m: int | None = None,
) -> list[SweepRow]:
    if len(Q_values) == 0:
        raise DataError("sweep needs at least one cutoff")
    A = np.asarray(A, dtype=float)
    B = deprivation_matrix(A, default_thresholds(A) if X is None else X)
    rows = []
    for q in Q_values:
        r = shortboard_indices(B, Y, q, m)
        rows.append(SweepRow(float(q), r.U, r.n_weak, r.T_af, r.M))
    ordered = sorted(rows, key=lambda r: r.Q)
    if any(b.U > a.U for a, b in zip(ordered, ordered[1:])):
        raise DataError("incidence increased with the cutoff")
    return rows


@dataclass(frozen=True)
class CountyRow:
    county: str
    ocr: float  # share of indicators counted as shortboards after censoring
    deg: float  # weighted intensity per counted indicator share
    ind: float  # censored weighted deprivation Z_i = ocr * deg
    contributions: tuple[float, ...]  # Y_j * censored_ij, summing to ind


def county_table(result: ShortboardResult, counties: Sequence[str]) -> list[CountyRow]:
    if len(counties) != result.m:
        raise DataError("county labels do not match the matrix rows")
    n = result.censored.shape[1]
    out = []
    for i, name in enumerate(counties):
        ocr = float(result.censored[i].sum()) / n
        z = float(result.Z[i])
        deg = z / ocr if ocr > 0 else 0.0
        contrib = tuple(float(v) for v in result.weights * result.censored[i])
        out.append(CountyRow(name, ocr, deg, z, contrib))
    out.sort(key=lambda r: -r.ind)
    return out
