"""Synthetic data: a YRD-shaped demo fixture and model-generated test panels.

``python -m regionscope.synthetic OUT_DIR`` regenerates the bundled fixture.
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

from .convergence import ConvergencePanel

# (id, name, group, lon, lat)
CITIES = [
    ("shanghai", "Shanghai", "Shanghai", 121.47, 31.23),
    ("nanjing", "Nanjing", "Jiangsu", 118.80, 32.06),
    ("wuxi", "Wuxi", "Jiangsu", 120.31, 31.49),
    ("xuzhou", "Xuzhou", "Jiangsu", 117.28, 34.20),
    ("changzhou", "Changzhou", "Jiangsu", 119.97, 31.81),
    ("suzhou_js", "Suzhou", "Jiangsu", 120.58, 31.30),
    ("nantong", "Nantong", "Jiangsu", 120.89, 31.98),
    ("lianyungang", "Lianyungang", "Jiangsu", 119.22, 34.60),
    ("huaian", "Huai'an", "Jiangsu", 119.02, 33.61),
    ("yancheng", "Yancheng", "Jiangsu", 120.16, 33.35),
    ("yangzhou", "Yangzhou", "Jiangsu", 119.41, 32.39),
    ("zhenjiang", "Zhenjiang", "Jiangsu", 119.45, 32.20),
    ("taizhou_js", "Taizhou", "Jiangsu", 119.92, 32.46),
    ("suqian", "Suqian", "Jiangsu", 118.28, 33.96),
    ("hangzhou", "Hangzhou", "Zhejiang", 120.16, 30.27),
    ("ningbo", "Ningbo", "Zhejiang", 121.55, 29.87),
    ("wenzhou", "Wenzhou", "Zhejiang", 120.70, 28.00),
    ("jiaxing", "Jiaxing", "Zhejiang", 120.76, 30.75),
    ("huzhou", "Huzhou", "Zhejiang", 120.09, 30.89),
    ("shaoxing", "Shaoxing", "Zhejiang", 120.58, 30.00),
    ("jinhua", "Jinhua", "Zhejiang", 119.65, 29.08),
    ("quzhou", "Quzhou", "Zhejiang", 118.87, 28.94),
    ("zhoushan", "Zhoushan", "Zhejiang", 122.21, 29.99),
    ("taizhou_zj", "Taizhou", "Zhejiang", 121.42, 28.66),
    ("lishui", "Lishui", "Zhejiang", 119.92, 28.47),
    ("hefei", "Hefei", "Anhui", 117.23, 31.82),
    ("wuhu", "Wuhu", "Anhui", 118.38, 31.33),
    ("bengbu", "Bengbu", "Anhui", 117.39, 32.92),
    ("huainan", "Huainan", "Anhui", 117.00, 32.63),
    ("maanshan", "Ma'anshan", "Anhui", 118.51, 31.67),
    ("huaibei", "Huaibei", "Anhui", 116.80, 33.96),
    ("tongling", "Tongling", "Anhui", 117.81, 30.94),
    ("anqing", "Anqing", "Anhui", 117.05, 30.52),
    ("huangshan", "Huangshan", "Anhui", 118.34, 29.71),
    ("chuzhou", "Chuzhou", "Anhui", 118.32, 32.30),
    ("fuyang", "Fuyang", "Anhui", 115.81, 32.89),
    ("suzhou_ah", "Suzhou*", "Anhui", 116.96, 33.65),
    ("luan", "Lu'an", "Anhui", 116.52, 31.74),
    ("bozhou", "Bozhou", "Anhui", 115.78, 33.84),
    ("chizhou", "Chizhou", "Anhui", 117.49, 30.66),
    ("xuancheng", "Xuancheng", "Anhui", 118.76, 30.94),
]

# (county, parent city id)
COUNTIES = [
    ("Dingyuan", "chuzhou"), ("Jixi", "xuancheng"), ("Jinzhai", "luan"), ("Susong", "anqing"),
    ("Guannan", "lianyungang"), ("Yingshang", "fuyang"), ("Sheyang", "yancheng"),
    ("Siyang", "suqian"), ("Sihong", "suqian"), ("Dangshan", "suzhou_ah"), ("Binhai", "yancheng"),
    ("Guanyun", "lianyungang"), ("Shuyang", "suqian"), ("Quanjiao", "chuzhou"),
    ("Langxi", "xuancheng"), ("Xiangshui", "yancheng"), ("Jianhu", "yancheng"),
    ("Linquan", "fuyang"), ("Yuexi", "anqing"), ("Lixin", "bozhou"), ("Huoshan", "luan"),
    ("Taihu", "anqing"), ("Taihe", "fuyang"), ("Lai'an", "chuzhou"), ("Funan", "fuyang"),
    ("Guoyang", "bozhou"), ("Wangjiang", "anqing"), ("Si", "suzhou_ah"), ("Mengcheng", "bozhou"),
    ("Huaining", "anqing"), ("Fengyang", "chuzhou"), ("Xiao", "suzhou_ah"), ("Shucheng", "luan"),
    ("Guangde", "xuancheng"), ("Funing", "yancheng"), ("Jing", "xuancheng"),
    ("Donghai", "lianyungang"), ("Lingbi", "suzhou_ah"), ("Jingde", "xuancheng"), ("Huoqiu", "luan"),
]

PUBLIC_DIMENSIONS = [
    "education", "public_culture", "medical_public_health", "social_security",
    "employment_service", "environment", "infrastructure",
]
MODERN_DIMENSIONS = ["economic_development", "industrial_progress", "resource_environment"]

# (id, name, direction, dimension, typical level)
INDICATORS = [
    ("edu_spend", "Per capita financial expenditure on education", "positive", "education", 3000),
    ("edu_enrol", "School enrollment ratio", "positive", "education", 0.95),
    ("edu_pupil_ratio", "Pupil-teacher ratio of compulsory education", "negative", "education", 14),
    ("edu_student_ratio", "Student-teacher ratio of higher and vocational education", "negative", "education", 17),
    ("edu_patents", "Patents granted per 10,000 people", "positive", "education", 40),
    ("edu_inventions", "Inventions per 10,000 people", "positive", "education", 8),
    ("edu_schools", "Compulsory schools per 10,000 people", "positive", "education", 1.2),
    ("cul_voc_schools", "Higher and vocational schools per 10,000 people", "positive", "public_culture", 0.05),
    ("cul_library", "Per capita library collections", "positive", "public_culture", 1.5),
    ("cul_museums", "Museums per 10,000 people", "positive", "public_culture", 0.1),
    ("med_hospitals", "Hospitals per 10,000 people", "positive", "medical_public_health", 0.4),
    ("med_beds", "Beds per 10,000 people", "positive", "medical_public_health", 60),
    ("med_doctors", "Doctors per 10,000 people", "positive", "medical_public_health", 28),
    ("soc_pension", "Urban pension insurance coverage", "positive", "social_security", 0.6),
    ("soc_medical", "Urban medical insurance coverage", "positive", "social_security", 0.7),
    ("soc_unemployment", "Urban unemployment insurance coverage", "positive", "social_security", 0.35),
    ("emp_rate", "Labor market employment rate", "positive", "employment_service", 0.9),
    ("emp_wage", "Average wage of employees", "positive", "employment_service", 80000),
    ("env_green", "Urban greening coverage", "positive", "environment", 0.42),
    ("env_waste", "Non-hazardous treatment rate of domestic waste", "positive", "environment", 0.98),
    ("env_sewage", "Centralized sewage treatment rate", "positive", "environment", 0.94),
    ("env_pm", "Annual average concentration of particulate matter", "negative", "environment", 40),
    ("inf_roads", "Urban road space per 10,000 people", "positive", "infrastructure", 20),
    ("inf_buses", "Buses in operation per 10,000 people", "positive", "infrastructure", 12),
    ("inf_transit", "Public transportation coverage rate", "positive", "infrastructure", 0.8),
    ("inf_gas", "Gas consumption per 10,000 people", "positive", "infrastructure", 300),
    ("inf_water", "Water consumption per 10,000 people", "positive", "infrastructure", 700),
    ("inf_land", "Land for construction per 10,000 people", "positive", "infrastructure", 1.3),
    ("mod_gdp", "Gross domestic product", "positive", "economic_development", 5000),
    ("mod_trade", "Level of import and export trade", "positive", "economic_development", 1500),
    ("mod_primary", "Level of development of the primary sector", "positive", "industrial_progress", 200),
    ("mod_secondary", "Level of development of the secondary industry", "positive", "industrial_progress", 2200),
    ("mod_tertiary", "Level of development of the tertiary industry", "positive", "industrial_progress", 2600),
    ("mod_resources", "Level of resource availability", "positive", "resource_environment", 50),
    ("mod_pollution", "Level of environmental pollution", "negative", "resource_environment", 30),
    ("dig_economy", "Digital economy index", "positive", "digital_economy", 0.3),
]

CONTROLS = [
    "dig_economy", "mod_gdp", "mod_trade", "mod_primary", "mod_secondary",
    "mod_tertiary", "mod_resources", "mod_pollution",
]

COUNTY_INDICATORS = [
    ("A", "Digital economy index"),
    ("B", "Participation in the cooperative economy"),
    ("C", "Share of agricultural mechanization"),
    ("D", "Number of museums per 10,000 people"),
    ("E", "Number of cultural centers per 10,000 people"),
    ("F", "Urban greening coverage"),
    ("G", "Garbage disposal rate"),
    ("H", "Sewage treatment rate"),
    ("I", "Hospitals per 10,000 people"),
    ("J", "Beds per 10,000 people"),
    ("K", "Penetration rate of water supply"),
    ("L", "Public transportation & road density"),
    ("M", "Number of books per 10,000 people"),
]

YEARS = [2017, 2018, 2019, 2020, 2021]
SHORTBOARD_SWEEP = [0.8, 0.75, 0.7, 0.65, 0.6, 0.55, 0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1]


def delaunay_neighbors(points: np.ndarray) -> list[set[int]]:
    tri = Delaunay(points)
    nbs: list[set[int]] = [set() for _ in range(len(points))]
    for simplex in tri.simplices:
        for a in simplex:
            for b in simplex:
                if a != b:
                    nbs[a].add(int(b))
    return nbs


def yrd_schema() -> dict:
    pts = np.array([[c[3], c[4]] for c in CITIES])
    nbs = delaunay_neighbors(pts)
    regions = []
    for k, (cid, name, group, lon, lat) in enumerate(CITIES):
        regions.append({
            "id": cid, "name": name, "level": "city", "parent": None, "group": group,
            "lon": lon, "lat": lat, "neighbors": sorted(CITIES[j][0] for j in nbs[k]),
        })
    for name, parent in COUNTIES:
        group = next(c[2] for c in CITIES if c[0] == parent)
        regions.append({
            "id": "county_" + name.lower().replace("'", ""), "name": name, "level": "county",
            "parent": parent, "group": group,
        })
    return {
        "dimensions": PUBLIC_DIMENSIONS + MODERN_DIMENSIONS + ["digital_economy"],
        "indicators": [
            {"id": i, "name": n, "direction": d, "dimension": dim, "units": ""}
            for i, n, d, dim, _ in INDICATORS
        ],
        "regions": regions,
    }


def yrd_panel(seed: int = 1) -> list[tuple[str, int, str, str]]:
    """Long-format rows driven by a persistent, spatially smooth development level.

    The latent level mean-reverts across years with shocks correlated over
    distance, and each city-indicator pair carries its own fixed offset.
    """
    rng = np.random.default_rng(seed)
    n, t, k = len(CITIES), len(YEARS), len(INDICATORS)
    pts = np.array([[c[3], c[4]] for c in CITIES])
    level = 0.9 * (pts[:, 0] - pts[:, 0].mean()) / pts[:, 0].std() + rng.normal(0, 0.6, n)
    level[0] += 1.0
    # shocks follow an error process on row-standardised inverse-distance weights
    dist = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    inv = np.divide(1.0, dist, out=np.zeros_like(dist), where=dist > 0)
    spread = np.linalg.inv(np.eye(n) - 0.5 * inv / inv.sum(axis=1, keepdims=True))
    path = np.empty((n, t))
    path[:, 0] = level
    for ti in range(1, t):
        prev = path[:, ti - 1]
        path[:, ti] = prev - 0.25 * (prev - prev.mean()) + 0.12 * (spread @ rng.normal(size=n))
    loading = rng.uniform(0.4, 1.0, k)
    trend = rng.uniform(0.01, 0.05, k)
    offset = rng.normal(0, 0.25, (n, k))
    shock = np.zeros(t)
    shock[YEARS.index(2020)] = -0.08
    rows = []
    for i, (cid, *_rest) in enumerate(CITIES):
        for ti, year in enumerate(YEARS):
            for j, (ind, _name, direction, _dim, base) in enumerate(INDICATORS):
                sign = -1.0 if direction == "negative" else 1.0
                z = sign * (0.35 * loading[j] * path[i, ti] + offset[i, j] + trend[j] * ti + shock[ti])
                z += rng.normal(0, 0.02)
                value = base * float(np.exp(z))
                cell = f"{value:.6g}"
                if rng.random() < 0.006:
                    cell = ""
                rows.append((cid, year, ind, cell))
    return rows


def county_matrix(seed: int = 2021) -> list[list[str]]:
    rng = np.random.default_rng(seed)
    weakness = rng.normal(0, 1, len(COUNTIES))
    rows = [["county", "group"] + [c for c, _ in COUNTY_INDICATORS]]
    for (name, parent), w in zip(COUNTIES, weakness):
        vals = 1.0 / (1.0 + np.exp(-(0.2 - 0.8 * w + rng.normal(0, 0.9, len(COUNTY_INDICATORS)))))
        rows.append([name, parent] + [f"{v:.4f}" for v in vals])
    return rows


def yrd_config() -> dict:
    return {
        "panel": "panel.csv",
        "schema": "schema.json",
        "geometry": None,
        "seed": 42,
        "preprocess": {"lower_q": 0.05, "upper_q": 0.95, "weighting": "entropy"},
        "coupling": {
            "alpha": 0.5,
            "public_dimensions": PUBLIC_DIMENSIONS,
            "modernization_dimensions": MODERN_DIMENSIONS,
        },
        "spatial": {"weights": "binary_contiguity", "row_standardize": True,
                    "permutations": 999, "alpha": 0.05},
        "theil": {"dimension_year": 2021},
        "shortboard": {"matrix": "counties.csv", "thresholds": None, "weights": None,
                       "weighting": "blended", "cutoff": 0.5, "sweep": SHORTBOARD_SWEEP},
        "converge": {"controls": CONTROLS, "weights": "inverse_distance", "row_standardize": True,
                     "level": 0.05},
    }


def write_yrd_fixture(out_dir: str | Path, seed: int = 1) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schema.json").write_text(json.dumps(yrd_schema(), indent=2) + "\n", encoding="utf-8")
    with open(out / "panel.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region_id", "year", "indicator_id", "value"])
        w.writerows(yrd_panel(seed))
    with open(out / "counties.csv", "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(county_matrix(seed + 4))
    (out / "config.json").write_text(json.dumps(yrd_config(), indent=2) + "\n", encoding="utf-8")
    return out


# -- model-generated convergence panels -------------------------------------------


def random_sites(n: int, rng: np.random.Generator) -> list[tuple[float, float]]:
    return [(float(118 + rng.uniform(0, 4)), float(29 + rng.uniform(0, 5))) for _ in range(n)]


def spatial_panel(
    W: np.ndarray,
    n_periods: int,
    rng: np.random.Generator,
    beta: float = -0.3,
    gamma: tuple[float, ...] = (),
    lam: float = 0.0,
    rho: float = 0.0,
    noise: float = 0.05,
) -> ConvergencePanel:
    """Growth panel from the two-way FE model with optional SEM or SAR structure."""
    n = W.shape[0]
    ln_d = rng.normal(-0.3, 0.2, (n, n_periods))
    x = rng.normal(size=(n, n_periods, len(gamma)))
    mu = rng.normal(0, 0.1, n)[:, None]
    tau = rng.normal(0, 0.1, n_periods)[None, :]
    e = rng.normal(0, noise, (n, n_periods))
    u = np.linalg.solve(np.eye(n) - lam * W, e) if lam else e
    mean = beta * ln_d + (x @ np.asarray(gamma, dtype=float) if gamma else 0.0) + mu + tau + u
    g = np.linalg.solve(np.eye(n) - rho * W, mean) if rho else mean
    return ConvergencePanel(
        tuple(f"r{i}" for i in range(n)), tuple(range(n_periods)), g, ln_d, x,
        tuple(f"x{k + 1}" for k in range(len(gamma))),
    )


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "yrd_synthetic"
    print(write_yrd_fixture(target))
