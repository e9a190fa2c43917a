"""Conditional beta-convergence on a panel of coordination degrees.

Growth ln(D[t+1] / D[t]) is regressed on ln D[t] and controls after a
two-way within transformation. Spatial variants (SEM, SAR) are fitted by
maximising the likelihood concentrated in the single spatial parameter.
Observations are stacked period-major: index ``t * N + i``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import DataError, NumericalError
from .panel import WeightMatrix, spectrum

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
BOUND_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class ConvergencePanel:
    region_ids: tuple[str, ...]
    years: tuple[int, ...]  # initial year of each transition
    growth: np.ndarray  # N x T
    ln_d: np.ndarray  # N x T
    controls: np.ndarray  # N x T x L
    control_names: tuple[str, ...] = ()

    @property
    def n_regions(self) -> int:
        return self.growth.shape[0]

    @property
    def n_periods(self) -> int:
        return self.growth.shape[1]


@dataclass(frozen=True, eq=False)
class ConvergenceFit:
    model: str
    beta: float
    gamma: dict[str, float]
    se: dict[str, float]
    pvalues: dict[str, float]
    log_likelihood: float
    r_squared: float
    sigma2: float
    speed: float
    n_regions: int
    n_periods: int
    rho: float | None = None
    lam: float | None = None
    spatial_se: float | None = None
    diagnostics: dict[str, tuple[float, float]] = field(default_factory=dict)
    X: np.ndarray | None = None
    y: np.ndarray | None = None
    residuals: np.ndarray | None = None
    fitted: np.ndarray | None = None

    @property
    def spatial_parameter(self) -> float | None:
        return self.rho if self.model == "SAR" else self.lam

    def converges(self, level: float = 0.05) -> bool:
        return self.beta < 0 and self.pvalues["beta"] < level


# -- panel construction ---------------------------------------------------


def build_panel(
    d: np.ndarray,
    region_ids: Sequence[str],
    years: Sequence[int],
    controls: np.ndarray | None = None,
    control_names: Sequence[str] = (),
) -> ConvergencePanel:
    """Growth transitions from a region x year grid of coordination degrees.

    Controls (region x year x L) are aligned to the initial year of each
    transition. Regions with a non-positive or missing D, or missing
    controls, are dropped with a warning.
    """
    d = np.asarray(d, dtype=float)
    n, n_years = d.shape
    if n != len(region_ids) or n_years != len(years):
        raise DataError("D grid does not match regions x years")
    if n_years < 2:
        raise DataError("convergence needs at least two years")
    if controls is None:
        controls = np.zeros((n, n_years, 0))
    controls = np.asarray(controls, dtype=float)
    if controls.shape[:2] != (n, n_years):
        raise DataError("control tensor does not match regions x years")
    names = tuple(control_names) or tuple(f"x{k + 1}" for k in range(controls.shape[2]))
    if len(names) != controls.shape[2]:
        raise DataError("control names do not match the control tensor")

    keep = []
    for i, rid in enumerate(region_ids):
        row = d[i]
        if not np.all(np.isfinite(row)) or np.any(row <= 0):
            log.warning("region %s dropped: non-positive or missing coordination degree", rid)
            continue
        if not np.all(np.isfinite(controls[i, :-1])):
            log.warning("region %s dropped: missing controls", rid)
            continue
        keep.append(i)
    if len(keep) * (n_years - 1) < 2:
        raise DataError("fewer than two usable transitions")
    ln = np.log(d[keep])
    return ConvergencePanel(
        region_ids=tuple(region_ids[i] for i in keep),
        years=tuple(int(y) for y in years[:-1]),
        growth=np.diff(ln, axis=1),
        ln_d=ln[:, :-1],
        controls=controls[keep][:, :-1, :],
        control_names=names,
    )


def within(a: np.ndarray) -> np.ndarray:
    """Two-way demeaning of a balanced region x period array."""
    return a - a.mean(axis=1, keepdims=True) - a.mean(axis=0, keepdims=True) + a.mean()


def design(panel: ConvergencePanel) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Within-transformed response and regressors, stacked period-major."""
    y = within(panel.growth).T.ravel()
    cols = [within(panel.ln_d).T.ravel()]
    cols += [within(panel.controls[:, :, k]).T.ravel() for k in range(panel.controls.shape[2])]
    return y, np.column_stack(cols), ["beta", *panel.control_names]


def _check_rank(X: np.ndarray, names: Sequence[str]) -> None:
    scale = max(1.0, float(np.abs(X).max()))
    rank = 0
    bad = []
    for k in range(X.shape[1]):
        r = np.linalg.matrix_rank(X[:, : k + 1], tol=1e-10 * scale * math.sqrt(X.shape[0]))
        if r == rank:
            bad.append(names[k])
        rank = r
    if bad:
        raise DataError(f"regressors collinear after within transformation: {', '.join(bad)}")


def _gauss_loglik(ssr: float, nobs: int) -> float:
    if not ssr > 0:
        raise NumericalError("non-finite likelihood: zero residual variance")
    return -0.5 * nobs * (math.log(2 * math.pi) + math.log(ssr / nobs) + 1.0)


def convergence_speed(beta: float, t_span: float) -> float:
    """s = -ln(1 + beta) / t_span."""
    if beta <= -1.0:
        raise DataError(f"overshooting convergence: beta={beta} <= -1")
    if t_span <= 0:
        raise DataError("t_span must be positive")
    return -math.log1p(beta) / t_span


def _speed(beta: float, t_span: float) -> float:
    if beta <= -1.0:
        log.warning("beta=%s <= -1; convergence speed undefined", beta)
        return math.nan
    return convergence_speed(beta, t_span)


def _coef_dicts(names, coef, se):
    with np.errstate(divide="ignore", invalid="ignore"):
        z = coef / se
    p = 2 * stats.norm.sf(np.abs(z))
    return (
        {k: float(v) for k, v in zip(names[1:], coef[1:])},
        {k: float(v) for k, v in zip(names, se)},
        {k: float(v) for k, v in zip(names, p)},
    )


def _r2(y: np.ndarray, fitted: np.ndarray) -> float:
    tss = float(((y - y.mean()) ** 2).sum())
    return 1.0 - float(((y - fitted) ** 2).sum()) / tss if tss > 0 else 0.0


# -- OLS with two-way fixed effects ---------------------------------------------


def effective_nobs(n_regions: int, n_periods: int) -> int:
    """Observations left after sweeping out region and period effects."""
    return (n_regions - 1) * (n_periods - 1)


def ols_fe(panel: ConvergencePanel) -> ConvergenceFit:
    """Within-transformed least squares with HC0 standard errors.

    The error variance and log-likelihood use the (N-1)(T-1) observations
    that survive the two-way within transformation.
    """
    y, X, names = design(panel)
    _check_rank(X, names)
    xtx_inv = np.linalg.inv(X.T @ X)
    coef = xtx_inv @ (X.T @ y)
    fitted = X @ coef
    e = y - fitted
    meat = (X * (e ** 2)[:, None]).T @ X
    se = np.sqrt(np.diag(xtx_inv @ meat @ xtx_inv))
    gamma, se_d, p_d = _coef_dicts(names, coef, se)
    ssr = float(e @ e)
    nobs = effective_nobs(panel.n_regions, panel.n_periods)
    return ConvergenceFit(
        model="OLS_FE",
        beta=float(coef[0]),
        gamma=gamma,
        se=se_d,
        pvalues=p_d,
        log_likelihood=_gauss_loglik(ssr, nobs) if ssr > 0 else math.inf,
        r_squared=_r2(y, fitted),
        sigma2=ssr / nobs,
        speed=_speed(float(coef[0]), panel.n_periods),
        n_regions=panel.n_regions,
        n_periods=panel.n_periods,
        X=X,
        y=y,
        residuals=e,
        fitted=fitted,
    )


# -- spatial helpers ---------------------------------------------------------------


def _dense(W) -> np.ndarray:
    return W.entries if isinstance(W, WeightMatrix) else np.asarray(W, dtype=float)


def spatial_lag(W: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Apply W to every period block of a period-major stacked vector or matrix."""
    if v.ndim == 1:
        return (v.reshape(-1, n) @ W.T).ravel()
    t = v.shape[0] // n
    return np.einsum("ij,tjk->tik", W, v.reshape(t, n, -1)).reshape(v.shape)


def projected_lag(W: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Spatial lag followed by cross-sectional demeaning within each period.

    Keeps lagged vectors inside the span of the two-way within transformation
    (region means of a lagged within-transformed vector are already zero).
    """
    lagged = spatial_lag(W, v, n)
    t = lagged.shape[0] // n
    blocks = lagged.reshape((t, n) + lagged.shape[1:])
    return (blocks - blocks.mean(axis=1, keepdims=True)).reshape(lagged.shape)


def _complement_basis(n: int) -> np.ndarray:
    """Orthonormal n x (n-1) basis of the complement of the constant vector."""
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))
    return q[:, 1:]


def transformed_spectrum(W) -> np.ndarray:
    """Eigenvalues of F'WF, the weights acting on cross-sectionally demeaned data."""
    w = _dense(W)
    f = _complement_basis(w.shape[0])
    ev = np.linalg.eigvals(f.T @ w @ f)
    return np.sort(ev.real)


def _transformed_traces(w: np.ndarray) -> tuple[float, float]:
    """(tr W*, tr(W*'W* + W*W*)) for the demeaned weights W* = F'WF."""
    f = _complement_basis(w.shape[0])
    ws = f.T @ w @ f
    return float(np.trace(ws)), float(np.trace(ws.T @ ws + ws @ ws))


def lm_diagnostics(fit: ConvergenceFit, W) -> dict[str, tuple[float, float]]:
    """Classical and robust LM tests for spatial lag and error dependence.

    Score tests of the within-transformed panel likelihood at a zero spatial
    parameter. Demeaning across regions leaves W* = F'WF with a nonzero
    trace, so each score carries the log-determinant term -(T-1) tr W*, and
    the information is profiled over the error variance. Each statistic is
    chi-squared(1) under its null.
    """
    w = _dense(W)
    n = fit.n_regions
    if w.shape != (n, n):
        raise DataError("weight matrix does not match the panel regions")
    names = ("LM_lag", "LM_error", "robust_LM_lag", "robust_LM_error")
    if not np.any(w):
        return {k: (0.0, 1.0) for k in names}
    e, y, fitted = fit.residuals, fit.y, fit.fitted
    t_eff = fit.n_periods - 1
    nobs = effective_nobs(n, fit.n_periods)
    sigma2 = float(e @ e) / nobs
    if sigma2 <= 0:
        raise NumericalError("zero residual variance in LM diagnostics")
    tr_w, tr_ww = _transformed_traces(w)
    t1 = t_eff * tr_ww - 2.0 * (t_eff * tr_w) ** 2 / nobs
    if t1 <= 0:
        raise NumericalError("singular information matrix in LM diagnostics")
    score_err = float(e @ spatial_lag(w, e, n)) / sigma2 - t_eff * tr_w
    score_lag = float(e @ spatial_lag(w, y, n)) / sigma2 - t_eff * tr_w
    wxb = projected_lag(w, fitted, n)
    X = fit.X
    resid_wxb = wxb - X @ np.linalg.lstsq(X, wxb, rcond=None)[0]
    j = float(resid_wxb @ resid_wxb) / sigma2 + t1
    if j - t1 <= 1e-12 * j:
        raise NumericalError("singular information matrix in LM diagnostics")
    stats_ = {
        "LM_lag": score_lag ** 2 / j,
        "LM_error": score_err ** 2 / t1,
        "robust_LM_lag": (score_lag - score_err) ** 2 / (j - t1),
        "robust_LM_error": (score_err - t1 / j * score_lag) ** 2 / (t1 * (1.0 - t1 / j)),
    }
    return {k: (float(v), float(stats.chi2.sf(v, 1))) for k, v in stats_.items()}


def parameter_interval(W) -> tuple[float, float]:
    """(1 / omega_min, 1 / omega_max) from the extreme eigenvalues of W."""
    ev = spectrum(_dense(W))
    lo, hi = float(ev.min()), float(ev.max())
    if not (lo < 0 < hi):
        raise NumericalError("weight matrix spectrum does not straddle zero")
    return 1.0 / lo, 1.0 / hi


def concentrated_loglik(panel: ConvergencePanel, W, model: str = "SEM") -> Callable[[float], float]:
    """Log-likelihood as a function of the spatial parameter alone.

    Coefficients and the error variance are profiled out. The sample is the
    two-way within-transformed panel with (N-1)(T-1) effective observations;
    ln|I - theta W*| uses the eigenvalues of the demeaned weights W*, once
    per effective period. At theta = 0 this equals the OLS_FE log-likelihood.
    """
    if model not in ("SEM", "SAR"):
        raise DataError(f"unknown spatial model {model!r}")
    w = _dense(W)
    n = panel.n_regions
    if w.shape != (n, n):
        raise DataError("weight matrix does not match the panel regions")
    y, X, _ = design(panel)
    wy, wX = projected_lag(w, y, n), projected_lag(w, X, n)
    omega = transformed_spectrum(w)
    t_eff = panel.n_periods - 1
    nobs = effective_nobs(n, panel.n_periods)

    def loglik(theta: float) -> float:
        with np.errstate(invalid="ignore", divide="ignore"):
            logdet = np.log1p(-theta * omega)
        if not np.all(np.isfinite(logdet)):
            return -math.inf
        ys = y - theta * wy
        Xs = X - theta * wX if model == "SEM" else X
        coef = np.linalg.lstsq(Xs, ys, rcond=None)[0]
        e = ys - Xs @ coef
        ssr = float(e @ e)
        if not ssr > 0:
            return -math.inf
        return (-0.5 * nobs * (math.log(2 * math.pi) + math.log(ssr / nobs) + 1.0)
                + t_eff * float(logdet.sum()))

    return loglik


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-8) -> float:
    """Maximiser of a unimodal ``f`` on [a, b], located to within ``tol``."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _fit_spatial(panel: ConvergencePanel, W, model: str, tol: float) -> ConvergenceFit:
    w = _dense(W)
    y, X, names = design(panel)
    _check_rank(X, names)
    lo, hi = parameter_interval(w)
    ll = concentrated_loglik(panel, w, model)
    span = hi - lo
    theta = golden_section_max(ll, lo + 1e-9 * span, hi - 1e-9 * span, tol)
    if theta - lo < BOUND_EPS or hi - theta < BOUND_EPS:
        raise NumericalError(f"spatial parameter at bound: {theta}")
    loglik = ll(theta)
    if not math.isfinite(loglik):
        raise NumericalError("non-finite likelihood at the optimum")

    n = panel.n_regions
    nobs = effective_nobs(n, panel.n_periods)
    wy, wX = projected_lag(w, y, n), projected_lag(w, X, n)
    ys = y - theta * wy
    Xs = X - theta * wX if model == "SEM" else X
    coef = np.linalg.lstsq(Xs, ys, rcond=None)[0]
    e = ys - Xs @ coef
    sigma2 = float(e @ e) / nobs
    se = np.sqrt(np.diag(sigma2 * np.linalg.inv(Xs.T @ Xs)))
    gamma, se_d, p_d = _coef_dicts(names, coef, se)

    h = 1e-4 * max(1.0, abs(theta))
    curv = (ll(theta + h) - 2 * loglik + ll(theta - h)) / (h * h)
    spatial_se = math.sqrt(-1.0 / curv) if curv < 0 else math.nan

    fitted = X @ coef + (theta * wy if model == "SAR" else 0.0)
    return ConvergenceFit(
        model=model,
        beta=float(coef[0]),
        gamma=gamma,
        se=se_d,
        pvalues=p_d,
        log_likelihood=float(loglik),
        r_squared=float(np.corrcoef(y, fitted)[0, 1] ** 2),
        sigma2=sigma2,
        speed=_speed(float(coef[0]), panel.n_periods),
        n_regions=n,
        n_periods=panel.n_periods,
        rho=float(theta) if model == "SAR" else None,
        lam=float(theta) if model == "SEM" else None,
        spatial_se=spatial_se,
        X=X,
        y=y,
        residuals=y - fitted,
        fitted=fitted,
    )


def fit_sem(panel: ConvergencePanel, W, tol: float = 1e-8) -> ConvergenceFit:
    return _fit_spatial(panel, W, "SEM", tol)


def fit_sar(panel: ConvergencePanel, W, tol: float = 1e-8) -> ConvergenceFit:
    return _fit_spatial(panel, W, "SAR", tol)
