"""Run configuration and the end-to-end stage runner."""
from __future__ import annotations

import copy
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import coupling as coupling_mod
from . import convergence as conv
from . import report
from .errors import ConfigError, DataError, NumericalError, RegionScopeError
from .panel import BINARY_CONTIGUITY, INVERSE_DISTANCE, build_weight_matrix, load_panel
from .preprocess import WEIGHTING, score_panel
from .shortboard import (county_table, decompose, default_thresholds, run_shortboard,
                         threshold_sweep)
from .spatial import lisa_classify, moran_permutation_test
from .theil import theil_by_dimension, theil_from_scores

log = logging.getLogger(__name__)

STAGES = ("score", "coupling", "moran", "lisa", "theil", "shortboard", "converge")
REQUIRES = {
    "score": (),
    "coupling": ("score",),
    "moran": ("score",),
    "lisa": ("score",),
    "theil": ("score",),
    "shortboard": (),
    "converge": ("coupling",),
}

# Defaults for every accepted key; anything else in a config file is rejected.
DEFAULTS: dict[str, Any] = {
    "panel": None,
    "schema": None,
    "geometry": None,
    "out": "out",
    "seed": 42,
    "threads": 1,
    "stages": {s: True for s in STAGES},
    "preprocess": {"lower_q": 0.05, "upper_q": 0.95, "weighting": "entropy"},
    "coupling": {"alpha": 0.5, "public_dimensions": None, "modernization_dimensions": []},
    "spatial": {"weights": BINARY_CONTIGUITY, "row_standardize": True, "permutations": 999,
                "alpha": 0.05, "variable": "S1"},
    "theil": {"dimension_year": None},
    "shortboard": {"matrix": None, "thresholds": None, "weights": None, "weighting": "blended",
                   "cutoff": 0.5, "sweep": None},
    "converge": {"controls": [], "weights": INVERSE_DISTANCE, "row_standardize": True,
                 "level": 0.05},
}


@dataclass
class RunConfig:
    """Validated run settings. ``doc`` holds the full normalised key tree."""

    doc: dict
    base_dir: Path = field(default_factory=Path.cwd)

    def __getitem__(self, key: str):
        node = self.doc
        for part in key.split("."):
            node = node[part]
        return node

    def path(self, key: str) -> Path | None:
        value = self[key]
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def seed(self) -> int:
        return self.doc["seed"]

    @property
    def threads(self) -> int:
        return self.doc["threads"]

    def recorded(self) -> dict:
        """Config as stored in the manifest: no output location or thread count."""
        doc = copy.deepcopy(self.doc)
        doc.pop("out")
        doc.pop("threads")
        return doc


def _merge(defaults: dict, doc: dict, prefix: str = "") -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'} must be a mapping")
    unknown = sorted(set(doc) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config key {prefix}{unknown[0]}")
    out = {}
    for key, default in defaults.items():
        if isinstance(default, dict):
            out[key] = _merge(default, doc.get(key) or {}, f"{prefix}{key}.")
        else:
            out[key] = copy.deepcopy(doc.get(key, default))
    return out


def _set_dotted(doc: dict, key: str, value: Any) -> None:
    parts = key.split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {key}: {p} is not a section")
    node[parts[-1]] = value


def parse_override(item: str) -> tuple[str, Any]:
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"--set expects key=value, got {item!r}")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError:
        value = raw
    return key.strip(), value


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _validate(doc: dict) -> None:
    _require(doc["panel"] is not None, "panel path is required")
    _require(doc["schema"] is not None, "schema path is required")
    _require(_is_int(doc["seed"]) and 0 <= doc["seed"] < 2 ** 64, "seed must be an unsigned 64-bit integer")
    _require(_is_int(doc["threads"]) and doc["threads"] >= 1, "threads must be a positive integer")
    for s, v in doc["stages"].items():
        _require(isinstance(v, bool), f"stages.{s} must be true or false")
    pre = doc["preprocess"]
    _require(_is_number(pre["lower_q"]) and _is_number(pre["upper_q"])
             and 0 <= pre["lower_q"] < pre["upper_q"] <= 1,
             "preprocess.lower_q/upper_q must satisfy 0 <= lower < upper <= 1")
    _require(pre["weighting"] in WEIGHTING, f"preprocess.weighting must be one of {sorted(WEIGHTING)}")
    cp = doc["coupling"]
    _require(_is_number(cp["alpha"]) and 0 <= cp["alpha"] <= 1, "coupling.alpha must lie in [0, 1]")
    for key in ("public_dimensions", "modernization_dimensions"):
        v = cp[key]
        _require(v is None or (isinstance(v, list) and all(isinstance(x, str) for x in v)),
                 f"coupling.{key} must be a list of dimension names")
    sp = doc["spatial"]
    _require(sp["weights"] in (BINARY_CONTIGUITY, INVERSE_DISTANCE),
             "spatial.weights must be binary_contiguity or inverse_distance")
    _require(isinstance(sp["row_standardize"], bool), "spatial.row_standardize must be true or false")
    _require(_is_int(sp["permutations"]) and sp["permutations"] >= 1,
             "spatial.permutations must be a positive integer")
    _require(_is_number(sp["alpha"]) and 0 < sp["alpha"] < 1, "spatial.alpha must lie in (0, 1)")
    _require(sp["variable"] in ("S1", "S2", "D"), "spatial.variable must be S1, S2 or D")
    th = doc["theil"]
    _require(th["dimension_year"] is None or _is_int(th["dimension_year"]),
             "theil.dimension_year must be an integer year")
    sb = doc["shortboard"]
    for key in ("thresholds", "weights", "sweep"):
        v = sb[key]
        _require(v is None or (isinstance(v, list) and all(_is_number(x) for x in v)),
                 f"shortboard.{key} must be a list of numbers")
    _require(sb["weighting"] in WEIGHTING or sb["weighting"] == "equal",
             "shortboard.weighting must be equal or one of " + ", ".join(sorted(WEIGHTING)))
    _require(_is_number(sb["cutoff"]) and 0 < sb["cutoff"] <= 1, "shortboard.cutoff must lie in (0, 1]")
    cv = doc["converge"]
    _require(isinstance(cv["controls"], list) and all(isinstance(x, str) for x in cv["controls"]),
             "converge.controls must be a list of indicator ids")
    _require(cv["weights"] in (BINARY_CONTIGUITY, INVERSE_DISTANCE),
             "converge.weights must be binary_contiguity or inverse_distance")
    _require(isinstance(cv["row_standardize"], bool), "converge.row_standardize must be true or false")
    _require(_is_number(cv["level"]) and 0 < cv["level"] < 1, "converge.level must lie in (0, 1)")


def build_config(doc: dict | None, base_dir: str | Path = ".", overrides: dict | None = None) -> RunConfig:
    doc = copy.deepcopy(doc or {})
    for key, value in (overrides or {}).items():
        _set_dotted(doc, key, value)
    merged = _merge(DEFAULTS, doc)
    _validate(merged)
    return RunConfig(merged, Path(base_dir))


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} does not parse: {exc}") from None
    return build_config(doc or {}, path.parent, overrides)


# -- stage runner ----------------------------------------------------------------


class StageFailure(RegionScopeError):
    def __init__(self, stage: str, cause: RegionScopeError):
        super().__init__(str(cause))
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code


@dataclass
class RunResult:
    out_dir: Path
    artifacts: dict[str, list[Path]]
    manifest: Path
    state: dict


def _guard(stage: str, fn: Callable[[], Any]) -> Any:
    try:
        return fn()
    except StageFailure:
        raise
    except RegionScopeError as exc:
        raise StageFailure(stage, exc) from exc
    except np.linalg.LinAlgError as exc:
        raise StageFailure(stage, NumericalError(f"linear algebra failure: {exc}")) from exc
    except FloatingPointError as exc:
        raise StageFailure(stage, NumericalError(str(exc))) from exc


class Pipeline:
    def __init__(self, config: RunConfig, out_dir: str | Path | None = None):
        self.cfg = config
        self.out = Path(out_dir) if out_dir is not None else config.path("out")
        self.state: dict[str, Any] = {}
        self.artifacts: dict[str, list[Path]] = {}

    # each _stage method computes into ``state``; _emit_* writes files

    def _ingest(self):
        panel = load_panel(self.cfg.path("panel"), self.cfg.path("schema"))
        cities = [r.id for r in panel.regions if r.level == "city"]
        if len(cities) < 3:
            raise DataError("panel needs at least three city regions")
        self.state["panel"] = panel.select_regions(cities)

    def _dims_for(self, key: str, fallback: list[str]) -> list[str]:
        dims = self.cfg[f"coupling.{key}"]
        if dims is None:
            dims = fallback
        schema = self.state["panel"].schema
        for d in dims:
            if d not in schema.dimensions:
                raise ConfigError(f"coupling.{key} names undeclared dimension {d!r}")
        return list(dims)

    def _subsystem(self, dims: list[str]):
        panel = self.state["panel"]
        ids = [i.id for i in panel.schema.indicators if i.dimension in dims]
        if not ids:
            raise ConfigError(f"no indicators in dimensions {dims}")
        pre = self.cfg["preprocess"]
        return score_panel(panel.select_indicators(ids), pre["lower_q"], pre["upper_q"], pre["weighting"])

    def _score(self):
        panel = self.state["panel"]
        modern = self._dims_for("modernization_dimensions", [])
        public = self._dims_for("public_dimensions", [d for d in panel.schema.dimensions if d not in modern])
        self.state["S1"] = self._subsystem(public)
        self.state["S2"] = self._subsystem(modern) if modern else None

    def _coupling(self):
        s1, s2 = self.state["S1"], self.state["S2"]
        if s2 is None:
            raise ConfigError("coupling needs coupling.modernization_dimensions")
        self.state["coupling"] = coupling_mod.couple(
            s1.region_ids, s1.years, s1.subsystem, s2.subsystem, self.cfg["coupling.alpha"])

    def _variable(self) -> np.ndarray:
        var = self.cfg["spatial.variable"]
        if var == "S1":
            return self.state["S1"].subsystem
        if var == "S2":
            if self.state["S2"] is None:
                raise ConfigError("spatial.variable S2 needs coupling.modernization_dimensions")
            return self.state["S2"].subsystem
        if "coupling" not in self.state:
            self._coupling()
        s1 = self.state["S1"]
        return coupling_mod.d_grid(self.state["coupling"], s1.region_ids, s1.years)

    def _spatial_weights(self, section: str):
        panel = self.state["panel"]
        return build_weight_matrix(panel.regions, self.cfg[f"{section}.weights"],
                                   self.cfg[f"{section}.row_standardize"])

    def _moran(self):
        W = self._spatial_weights("spatial")
        y = self._variable()
        sp = self.cfg["spatial"]
        self.state["moran"] = [
            moran_permutation_test(y[:, t], W, sp["permutations"], self.cfg.seed, self.cfg.threads)
            for t in range(y.shape[1])
        ]

    def _lisa(self):
        W = self._spatial_weights("spatial")
        y = self._variable()
        sp = self.cfg["spatial"]
        self.state["lisa"] = [
            lisa_classify(y[:, t], W, sp["permutations"], self.cfg.seed, sp["alpha"], self.cfg.threads)
            for t in range(y.shape[1])
        ]

    def _theil(self):
        s1 = self.state["S1"]
        groups = [r.group or "all" for r in self.state["panel"].regions]
        yearly = [theil_from_scores(s1.composite[:, t], groups) for t in range(len(s1.years))]
        year = self.cfg["theil.dimension_year"]
        year = s1.years[-1] if year is None else year
        by_dim = theil_by_dimension(s1, year, groups)
        self.state["theil"] = (list(dict.fromkeys(groups)), yearly, year, by_dim)

    def _shortboard(self):
        sb = self.cfg["shortboard"]
        path = self.cfg.path("shortboard.matrix")
        if path is None:
            raise ConfigError("shortboard.matrix is required for the shortboard stage")
        counties, groups, names, A = read_county_matrix(path)
        n = A.shape[1]
        for key in ("thresholds", "weights"):
            if sb[key] is not None and len(sb[key]) != n:
                raise ConfigError(f"shortboard.{key} has {len(sb[key])} values, matrix has {n} indicators")
        X = np.asarray(sb["thresholds"], dtype=float) if sb["thresholds"] is not None else default_thresholds(A)
        if sb["weights"] is not None:
            Y = np.asarray(sb["weights"], dtype=float)
        elif sb["weighting"] == "equal":
            Y = np.full(n, 1.0 / n)
        else:
            Y = WEIGHTING[sb["weighting"]](A, names).values
        result = run_shortboard(A, X, Y, sb["cutoff"])
        sweep = threshold_sweep(A, Y, sb["sweep"], X) if sb["sweep"] else []
        self.state["shortboard"] = {
            "counties": counties, "groups": groups, "indicators": names, "X": X, "Y": Y,
            "result": result, "sweep": sweep, "table": county_table(result, counties),
            "by_indicator": decompose(result, "indicator"),
            "by_group": decompose(result, groups) if groups else {},
        }

    def _control_tensor(self) -> np.ndarray | None:
        names = self.cfg["converge.controls"]
        if not names:
            return None
        panel = self.state["panel"]
        for c in names:
            panel.schema.indicator(c)
        pre = self.cfg["preprocess"]
        table = score_panel(panel.select_indicators(names), pre["lower_q"], pre["upper_q"], pre["weighting"])
        return table.indicator_scores / 100.0

    def _converge(self):
        s1 = self.state["S1"]
        d = coupling_mod.d_grid(self.state["coupling"], s1.region_ids, s1.years)
        controls = self._control_tensor()
        names = self.cfg["converge.controls"]
        cpanel = conv.build_panel(d, s1.region_ids, s1.years, controls, names)
        regions = [r for r in self.state["panel"].regions if r.id in set(cpanel.region_ids)]
        W = build_weight_matrix(regions, self.cfg["converge.weights"], self.cfg["converge.row_standardize"])
        ols = conv.ols_fe(cpanel)
        diag = conv.lm_diagnostics(ols, W)
        sem = conv.fit_sem(cpanel, W)
        sar = conv.fit_sar(cpanel, W)
        self.state["converge"] = {"fits": [ols, sem, sar], "lm": diag, "panel": cpanel}

    # -- emitters ------------------------------------------------------------------

    def _file(self, name: str) -> Path:
        return self.out / name

    def _emit_ingest(self) -> list[Path]:
        p = self.state["panel"]
        doc = {
            "regions": p.region_ids, "years": list(p.years), "indicators": p.indicator_ids,
            "missing_cells": p.n_missing, "parse_warnings": p.parse_warnings,
        }
        return [report.emit_table(doc, self._file("ingest.json"), "json")]

    def _emit_score(self) -> list[Path]:
        rows = []
        tables = [("S1", self.state["S1"])]
        if self.state["S2"] is not None:
            tables.append(("S2", self.state["S2"]))
        for label, tab in tables:
            for i, rid in enumerate(tab.region_ids):
                for t, year in enumerate(tab.years):
                    for k, dim in enumerate(tab.dimensions):
                        rows.append([rid, year, label, dim, tab.dimension_scores[i, t, k]])
                    rows.append([rid, year, label, "composite", tab.composite[i, t]])
        csv_path = report.emit_table(rows, self._file("scores.csv"), "csv",
                                     ["region_id", "year", "subsystem", "component", "score"])
        meta = {
            label: {
                "weighting": tab.weights.method,
                "weights": tab.weights.as_dict(),
                "bounds": {k: {"x_l": b.x_l, "x_h": b.x_h, "shift": b.shift} for k, b in tab.bounds.items()},
            }
            for label, tab in tables
        }
        meta["quantile_method"] = "linear"
        return [csv_path, report.emit_table(meta, self._file("scores.json"), "json")]

    def _emit_coupling(self) -> list[Path]:
        recs = self.state["coupling"]
        main = report.emit_table(report.coupling_rows(recs), self._file("coupling.csv"), "csv",
                                 report.COUPLING_HEADER)
        counts: dict[tuple[int, str], int] = {}
        for r in recs:
            counts[(r.year, r.type_label)] = counts.get((r.year, r.type_label), 0) + 1
        labels = [b.type_label for b in coupling_mod.DEFAULT_TAXONOMY.bands]
        years = sorted({r.year for r in recs})
        rows = [[lab] + [counts.get((y, lab), 0) for y in years] for lab in labels]
        summary = report.emit_table(rows, self._file("coupling_stage_counts.csv"), "csv",
                                    ["type"] + [str(y) for y in years])
        return [main, summary]

    def _emit_moran(self) -> list[Path]:
        years = self.state["S1"].years
        rows = [[y, r.I, r.expected, r.z_score, r.p_value, r.z_norm, r.p_norm, r.n_permutations, r.seed]
                for y, r in zip(years, self.state["moran"])]
        return [report.emit_table(rows, self._file("moran.csv"), "csv", report.MORAN_HEADER)]

    def _emit_lisa(self) -> list[Path]:
        s1 = self.state["S1"]
        rows = []
        for t, (year, res) in enumerate(zip(s1.years, self.state["lisa"])):
            for i, rid in enumerate(s1.region_ids):
                rows.append([rid, year, res.local_i[i], res.lag[i], res.quadrant[i],
                             res.p_value[i], bool(res.significant[i])])
        files = [report.emit_table(rows, self._file("lisa.csv"), "csv", report.LISA_HEADER)]
        geom = self.cfg.path("geometry")
        if geom is not None:
            files.append(report.emit_table(lisa_geojson(geom, rows), self._file("lisa.geojson"), "json"))
        return files

    def _emit_theil(self) -> list[Path]:
        groups, yearly, year, by_dim = self.state["theil"]
        header = report.theil_header(groups)
        rows = [report.theil_row(y, dec, groups) for y, dec in zip(self.state["S1"].years, yearly)]
        a = report.emit_table(rows, self._file("theil.csv"), "csv", header)
        rows = [report.theil_row(dim, dec, groups) for dim, dec in by_dim.items()]
        b = report.emit_table(rows, self._file(f"theil_dimensions_{year}.csv"), "csv", header)
        return [a, b]

    def _emit_shortboard(self) -> list[Path]:
        st = self.state["shortboard"]
        res = st["result"]
        files = [
            report.emit_table(report.sweep_rows(st["sweep"]), self._file("shortboard_sweep.csv"),
                              "csv", report.SWEEP_HEADER),
            report.emit_table(report.county_rows(st["table"]), self._file("shortboard_counties.csv"),
                              "csv", report.county_header(st["indicators"])),
        ]
        doc = {
            "cutoff": res.cutoff, "U": res.U, "T": res.T_af, "M": res.M,
            "weak_counties": [c for c, f in zip(st["counties"], res.weak) if f],
            "thresholds": dict(zip(st["indicators"], st["X"])),
            "weights": dict(zip(st["indicators"], st["Y"])),
            "indicator_contributions": {st["indicators"][j]: v for j, v in st["by_indicator"].items()},
            "group_contributions": st["by_group"],
        }
        files.append(report.emit_table(doc, self._file("shortboard.json"), "json"))
        return files

    def _emit_converge(self) -> list[Path]:
        st = self.state["converge"]
        header, rows = report.convergence_rows(st["fits"])
        for k, (stat, p) in st["lm"].items():
            rows.append([k] + [stat, math.nan, math.nan])
            rows.append([f"{k}_p"] + [p, math.nan, math.nan])
        a = report.emit_table(rows, self._file("convergence.csv"), "csv", header)
        level = self.cfg["converge.level"]
        doc = {
            "regions": list(st["panel"].region_ids),
            "transitions": list(st["panel"].years),
            "lm_diagnostics": {k: {"statistic": s, "p_value": p} for k, (s, p) in st["lm"].items()},
            "models": {
                f.model: {
                    "beta": f.beta, "coefficients": f.gamma, "se": f.se, "p_values": f.pvalues,
                    "rho": f.rho, "lambda": f.lam, "spatial_se": f.spatial_se,
                    "log_likelihood": f.log_likelihood, "r_squared": f.r_squared, "sigma2": f.sigma2,
                    "speed": f.speed, "converges": f.converges(level),
                }
                for f in st["fits"]
            },
        }
        return [a, report.emit_table(doc, self._file("convergence.json"), "json")]

    # -- driver --------------------------------------------------------------------

    def _needed(self, targets: list[str]) -> list[str]:
        order = []

        def visit(s):
            for dep in REQUIRES[s]:
                visit(dep)
            if s not in order:
                order.append(s)

        for t in targets:
            visit(t)
        return [s for s in STAGES if s in order]

    def run(self, targets: list[str] | None = None) -> RunResult:
        if targets is None:
            targets = [s for s in STAGES if self.cfg["stages"][s]]
        unknown = [t for t in targets if t not in STAGES and t != "ingest"]
        if unknown:
            raise ConfigError(f"unknown stage {unknown[0]!r}")
        _guard("ingest", self._ingest)
        for stage in self._needed([t for t in targets if t != "ingest"]):
            _guard(stage, getattr(self, f"_{stage}"))
        self.out.mkdir(parents=True, exist_ok=True)
        for stage in (["ingest"] if "ingest" in targets else []) + [s for s in STAGES if s in targets]:
            self.artifacts[stage] = _guard(stage, getattr(self, f"_emit_{stage}"))
        inputs = {"panel": self.cfg.path("panel"), "schema": self.cfg.path("schema")}
        for key in ("geometry", "shortboard.matrix"):
            if self.cfg[key] is not None:
                inputs[key] = self.cfg.path(key)
        manifest = _guard("manifest", lambda: report.write_manifest(
            self.out, inputs, self.cfg.recorded(), self.artifacts))
        return RunResult(self.out, self.artifacts, manifest, self.state)


def run_pipeline(config: RunConfig, targets: list[str] | None = None,
                 out_dir: str | Path | None = None) -> RunResult:
    """Run ``targets`` (default: every stage enabled in ``config``) and write artifacts."""
    return Pipeline(config, out_dir).run(targets)


# -- input helpers -----------------------------------------------------------------


def read_county_matrix(path: str | Path) -> tuple[list[str], list[str], list[str], np.ndarray]:
    """County score matrix CSV: ``county``, optional ``group``, then one column per indicator."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read county matrix {path}: {exc.strerror or exc}") from None
    if not rows or not rows[0] or rows[0][0] != "county":
        raise DataError("county matrix header must start with 'county'")
    header = rows[0]
    has_group = len(header) > 1 and header[1] == "group"
    first = 2 if has_group else 1
    names = header[first:]
    if not names:
        raise DataError("county matrix has no indicator columns")
    counties, groups, values = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"county matrix line {lineno}: expected {len(header)} cells")
        counties.append(row[0])
        if has_group:
            groups.append(row[1])
        try:
            values.append([float(v) for v in row[first:]])
        except ValueError:
            raise DataError(f"county matrix line {lineno}: non-numeric score") from None
    if len(set(counties)) != len(counties):
        raise DataError("duplicate county names in the county matrix")
    A = np.array(values, dtype=float)
    if A.size == 0 or not np.all(np.isfinite(A)):
        raise DataError("county matrix is empty or has missing scores")
    return counties, groups, names, A


def lisa_geojson(path: str | Path, rows: list[list]) -> dict:
    """Copy of a GeoJSON FeatureCollection with per-year LISA properties added.

    Features are matched on ``properties.region_id``.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read geometry {path}: {exc}") from None
    if doc.get("type") != "FeatureCollection":
        raise DataError("geometry must be a GeoJSON FeatureCollection")
    by_region: dict[str, dict] = {}
    for rid, year, local_i, _lag, quad, p, sig in rows:
        by_region.setdefault(rid, {})[str(year)] = {
            "local_i": local_i, "quadrant": quad, "p_value": p, "significant": sig,
        }
    for feat in doc.get("features", []):
        rid = (feat.get("properties") or {}).get("region_id")
        if rid in by_region:
            feat["properties"]["lisa"] = by_region[rid]
    return doc
