"""Table emitters and the run manifest.

CSV cells holding floats are printed with four decimals, rounded half to
even from the shortest repr of the value. JSON keeps full precision and
maps non-finite numbers to null. Every file is UTF-8 with LF endings.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DataError, RegionScopeError

DECIMALS = 4
_QUANTUM = Decimal(1).scaleb(-DECIMALS)


def format_number(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NA"
    if math.isinf(x):
        return "Inf" if x > 0 else "-Inf"
    s = str(Decimal(repr(x)).quantize(_QUANTUM, rounding=ROUND_HALF_EVEN))
    return "0.0000" if s == "-0.0000" else s


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(v)
    return str(v)


def _write(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise RegionScopeError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise DataError(f"row has {len(row)} cells, header has {width}")
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def json_text(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False, ensure_ascii=False, allow_nan=False) + "\n"


def emit_table(rows: Sequence[Sequence[Any]] | Any, path: str | Path, fmt: str = "csv",
               header: Sequence[str] | None = None) -> Path:
    """Write ``rows`` under ``header`` as CSV, or any JSON-able object as JSON."""
    if fmt == "csv":
        if header is None:
            raise DataError("csv output needs a header")
        return _write(Path(path), csv_text(header, rows))
    if fmt == "json":
        return _write(Path(path), json_text(rows))
    raise DataError(f"unknown output format {fmt!r}")


# -- stage layouts ------------------------------------------------------------

COUPLING_HEADER = ["region_id", "year", "S1", "S2", "C", "T", "D", "type", "stage"]
MORAN_HEADER = ["year", "I", "expected", "z_score", "p_value", "z_norm", "p_norm",
                "n_permutations", "seed"]
LISA_HEADER = ["region_id", "year", "local_i", "lag", "quadrant", "p_value", "significant"]
SWEEP_HEADER = ["Q", "U", "weak_counties", "T", "M"]


def coupling_rows(records) -> list[list]:
    return [[r.region_id, r.year, r.S1, r.S2, r.C, r.Tc, r.D, r.type_label, r.stage] for r in records]


def theil_header(groups: Sequence[str]) -> list[str]:
    return (["year_or_dimension", "T"] + [f"within_{g}" for g in groups]
            + ["within_value", "between_value", "within_contrib_pct", "between_contrib_pct"])


def theil_row(label, dec, groups: Sequence[str]) -> list:
    """One yearly decomposition row: group T_k, then contribution values and percentages."""
    by = {g.group: g for g in dec.groups}
    within_k = [by[g].T_k if g in by else math.nan for g in groups]
    w_pct = 100.0 * dec.within_contribution if dec.T_total > 0 else math.nan
    b_pct = 100.0 * dec.between_contribution if dec.T_total > 0 else math.nan
    return [label, dec.T_total, *within_k, dec.T_within, dec.T_between, w_pct, b_pct]


def sweep_rows(rows) -> list[list]:
    return [[r.Q, r.U, r.count, r.T_af, r.M] for r in rows]


def county_header(indicators: Sequence[str]) -> list[str]:
    return ["county", "ocr", "deg", "ind", *indicators]


def county_rows(rows) -> list[list]:
    return [[r.county, r.ocr, r.deg, r.ind, *r.contributions] for r in rows]


def convergence_rows(fits) -> tuple[list[str], list[list]]:
    """One row per statistic, one column per model."""
    header = ["variable"] + [f.model for f in fits]
    names = list(dict.fromkeys(k for f in fits for k in f.gamma))
    rows: list[list] = []
    for k in names:
        rows.append([k] + [f.gamma.get(k, math.nan) for f in fits])
        rows.append([f"{k}_se"] + [f.se.get(k, math.nan) for f in fits])
        rows.append([f"{k}_p"] + [f.pvalues.get(k, math.nan) for f in fits])
    rows.append(["rho"] + [f.rho if f.rho is not None else math.nan for f in fits])
    rows.append(["lambda"] + [f.lam if f.lam is not None else math.nan for f in fits])
    rows.append(["spatial_se"] + [f.spatial_se if f.spatial_se is not None else math.nan for f in fits])
    rows.append(["R2"] + [f.r_squared for f in fits])
    rows.append(["log_likelihood"] + [f.log_likelihood for f in fits])
    rows.append(["sigma2"] + [f.sigma2 for f in fits])
    rows.append(["speed"] + [f.speed for f in fits])
    rows.append(["N"] + [f.n_regions for f in fits])
    rows.append(["transitions"] + [f.n_periods for f in fits])
    return header, rows


# -- manifest -------------------------------------------------------------------

MANIFEST = "manifest.json"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def file_entry(path: Path, root: Path) -> dict:
    return {"path": path.relative_to(root).as_posix(), "sha256": sha256_file(path),
            "bytes": path.stat().st_size}


def write_manifest(out_dir: str | Path, inputs: dict[str, Path], config: dict,
                   artifacts: dict[str, list[Path]]) -> Path:
    root = Path(out_dir)
    doc = {
        "format": 1,
        "inputs": {k: {"file": Path(p).name, "sha256": sha256_file(p)} for k, p in inputs.items()},
        "config": config,
        "artifacts": [
            {"stage": stage, "files": [file_entry(Path(p), root) for p in files]}
            for stage, files in artifacts.items()
        ],
    }
    return _write(root / MANIFEST, json_text(doc))


def verify_manifest(out_dir: str | Path) -> list[str]:
    """Problems found when re-hashing the files listed in the manifest; empty if all match."""
    root = Path(out_dir)
    try:
        doc = json.loads((root / MANIFEST).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return [f"unreadable manifest: {exc}"]
    problems = []
    for art in doc.get("artifacts", []):
        for f in art["files"]:
            p = root / f["path"]
            if not p.is_file():
                problems.append(f"{f['path']}: missing")
            elif sha256_file(p) != f["sha256"]:
                problems.append(f"{f['path']}: checksum mismatch")
            elif p.stat().st_size != f["bytes"]:
                problems.append(f"{f['path']}: size mismatch")
    return problems
