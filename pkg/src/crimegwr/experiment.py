"""Evaluation harness: deterministic train/test splits, per-year holdout
evaluation with GeoID-averaged prediction, heat-map grids, and a synthetic
data generator with known coefficient surfaces for verification."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geo import GeoPoint
from .gwr import (
    DegenerateFit,
    FittedGWR,
    GWRDataset,
    KernelSpec,
    default_bandwidth_grid,
    fit,
    fit_local,
    predict,
    r_squared,
    select_bandwidth,
)


class YearTooSmall(Exception):
    pass


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")


def split_indices(
    years: Sequence[int], keys: Sequence, spec: SplitSpec
) -> tuple[list[int], list[int]]:
    """Deterministic stratified holdout split.

    Rows are grouped by year; within each year they are ordered by their
    stable identity key and permuted by a (seed, year)-derived RNG, so the
    split depends only on (seed, row identity), not input order. Every year
    with at least two rows appears on both sides.
    """
    by_year: dict[int, list[int]] = {}
    for i, yr in enumerate(years):
        by_year.setdefault(int(yr), []).append(i)
    train: list[int] = []
    test: list[int] = []
    for yr in sorted(by_year):
        idx = sorted(by_year[yr], key=lambda i: (repr(keys[i]), i))
        rng = np.random.default_rng([spec.seed & 0xFFFFFFFF, spec.seed >> 32 & 0xFFFFFFFF, yr])
        perm = rng.permutation(len(idx))
        n = len(idx)
        n_test = 0 if n < 2 else min(n - 1, max(1, round(spec.test_fraction * n)))
        chosen = set(perm[:n_test].tolist())
        for k, i in enumerate(idx):
            (test if k in chosen else train).append(i)
    return sorted(train), sorted(test)


@dataclass(frozen=True)
class BBox:
    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float

    def __post_init__(self):
        if self.lon_min >= self.lon_max or self.lat_min >= self.lat_max:
            raise ValueError("degenerate bounding box")

    def normalize(self, lon, lat):
        """Map coordinates to (t_u, t_v) in [0, 1] over the box."""
        t_u = (np.asarray(lon) - self.lon_min) / (self.lon_max - self.lon_min)
        t_v = (np.asarray(lat) - self.lat_min) / (self.lat_max - self.lat_min)
        return t_u, t_v


@dataclass(frozen=True)
class CoefficientSurface:
    """Analytic coefficient field over a bounding box's normalized coords.

    kinds: constant (value), linear_lon (base + slope * t_u),
    sin_lat (amplitude * sin(pi * t_v)).
    """

    kind: str
    value: float = 0.0
    base: float = 0.0
    slope: float = 0.0
    amplitude: float = 0.0

    def evaluate(self, t_u, t_v):
        if self.kind == "constant":
            return np.full_like(np.asarray(t_u, dtype=float), self.value)
        if self.kind == "linear_lon":
            return self.base + self.slope * np.asarray(t_u, dtype=float)
        if self.kind == "sin_lat":
            return self.amplitude * np.sin(math.pi * np.asarray(t_v, dtype=float))
        raise ValueError(f"unknown surface kind: {self.kind!r}")

    def range_over_box(self) -> float:
        """max - min of the surface over the unit square, analytically."""
        if self.kind == "constant":
            return 0.0
        if self.kind == "linear_lon":
            return abs(self.slope)
        if self.kind == "sin_lat":
            return abs(self.amplitude)  # sin(pi t) spans [0, 1] on [0, 1]
        raise ValueError(f"unknown surface kind: {self.kind!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    n_locations: int
    bbox: BBox
    surfaces: tuple[CoefficientSurface, ...]
    noise_sigma: float
    seed: int
    rows_per_location: int = 1
    years: tuple[int, ...] = (2015,)

    def __post_init__(self):
        if self.n_locations < 10:
            raise ValueError("need at least 10 locations")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


@dataclass(frozen=True)
class SyntheticData:
    dataset: GWRDataset
    years: np.ndarray
    true_beta: np.ndarray  # (n, p) evaluated at each row's location
    spec: SyntheticSpec


def generate_synthetic(spec: SyntheticSpec) -> SyntheticData:
    """Draw locations uniformly in the bbox and responses from the surfaces.

    Feature 0 is the intercept; the rest are standard normal. Each location
    gets its own geoid shared by its rows. Fixed seed gives bit-identical
    output.
    """
    rng = np.random.default_rng(spec.seed)
    p = len(spec.surfaces)
    loc_lons = rng.uniform(spec.bbox.lon_min, spec.bbox.lon_max, spec.n_locations)
    loc_lats = rng.uniform(spec.bbox.lat_min, spec.bbox.lat_max, spec.n_locations)
    n = spec.n_locations * spec.rows_per_location
    lons = np.repeat(loc_lons, spec.rows_per_location)
    lats = np.repeat(loc_lats, spec.rows_per_location)
    geoids = tuple(
        f"G{k:04d}" for k in np.repeat(np.arange(spec.n_locations), spec.rows_per_location)
    )
    years = np.array([spec.years[i % len(spec.years)] for i in range(n)])

    X = rng.standard_normal((n, p))
    X[:, 0] = 1.0
    t_u, t_v = spec.bbox.normalize(lons, lats)
    true_beta = np.column_stack([s.evaluate(t_u, t_v) for s in spec.surfaces])
    y = np.sum(true_beta * X, axis=1)
    if spec.noise_sigma > 0:
        y = y + rng.normal(0.0, spec.noise_sigma, n)
    dataset = GWRDataset(lons=lons, lats=lats, X=X, y=y, geoids=geoids)
    return SyntheticData(dataset=dataset, years=years, true_beta=true_beta, spec=spec)


@dataclass(frozen=True)
class YearResult:
    year: int
    bandwidth_km: float
    r2: float
    pairs: tuple[tuple[str, float, float], ...]  # (geoid, empirical, predicted)
    refit_fallbacks: int


def _subset(data: GWRDataset, idx: Sequence[int]) -> GWRDataset:
    idx = list(idx)
    return GWRDataset(
        lons=data.lons[idx],
        lats=data.lats[idx],
        X=data.X[idx],
        y=data.y[idx],
        geoids=tuple(data.geoids[i] for i in idx) if data.geoids is not None else None,
    )


def run_yearly_evaluation(
    data: GWRDataset,
    years: Sequence[int],
    split_spec: SplitSpec,
    bandwidth_km: Optional[float] = None,
    bandwidth_grid: Optional[Sequence[float]] = None,
    feature_names: Optional[Sequence[str]] = None,
) -> dict[int, YearResult]:
    """The holdout protocol: per year, fit on training rows and predict held
    out rows by GeoID-averaged coefficients.

    Test GeoIDs with no training fit fall back to refitting at the test
    point; the fallback count is reported. Exactly one of ``bandwidth_km``
    and ``bandwidth_grid`` must be given.
    """
    if (bandwidth_km is None) == (bandwidth_grid is None):
        raise ValueError("give exactly one of bandwidth_km or bandwidth_grid")
    years = np.asarray(years)
    keys = [
        (data.row_geoid(i), float(data.lons[i]), float(data.lats[i]),
         tuple(data.X[i]), float(data.y[i]))
        for i in range(data.n)
    ]
    train_idx, test_idx = split_indices(years, keys, split_spec)
    results: dict[int, YearResult] = {}
    for yr in sorted(set(int(v) for v in years)):
        tr = [i for i in train_idx if years[i] == yr]
        te = [i for i in test_idx if years[i] == yr]
        if len(tr) < 2 * data.p:
            raise YearTooSmall(f"year {yr}: {len(tr)} training rows < 2p = {2 * data.p}")
        train = _subset(data, tr)
        if bandwidth_km is not None:
            h = bandwidth_km
        else:
            h, _ = select_bandwidth(train, list(bandwidth_grid))
        model = fit(train, KernelSpec(bandwidth_km=h), feature_names=feature_names)
        by_geoid = model.by_geoid()
        fallbacks = 0
        preds = []
        for i in te:
            geoid = data.row_geoid(i)
            point = GeoPoint(lon=float(data.lons[i]), lat=float(data.lats[i]))
            if geoid in by_geoid:
                yhat = predict(model, train, point, data.X[i], mode="geoid_average", geoid=geoid)
            else:
                yhat = predict(model, train, point, data.X[i], mode="refit_at_point")
                fallbacks += 1
            preds.append((geoid, yhat))
        empirical = np.array([data.y[i] for i in te])
        predicted = np.array([p for _, p in preds])
        r2 = r_squared(empirical, predicted)
        results[yr] = YearResult(
            year=yr,
            bandwidth_km=float(h),
            r2=r2,
            pairs=tuple(
                (geoid, float(emp), float(pred))
                for (geoid, pred), emp in zip(preds, empirical)
            ),
            refit_fallbacks=fallbacks,
        )
    return results


def scatter_csv(results: dict[int, "YearResult"]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["geoid", "year", "empirical", "predicted"])
    for yr in sorted(results):
        for geoid, emp, pred in results[yr].pairs:
            writer.writerow([geoid, yr, repr(emp), repr(pred)])
    return buf.getvalue()


@dataclass(frozen=True)
class HeatmapGrid:
    bbox: BBox
    resolution: int
    values: np.ndarray  # (resolution, resolution), NaN for degenerate cells
    crime_type: str = ""
    year: Optional[int] = None


def heatmap(
    model: FittedGWR,
    train: GWRDataset,
    bbox: BBox,
    resolution: int,
    features: np.ndarray,
    crime_type: str = "",
    year: Optional[int] = None,
) -> HeatmapGrid:
    """Predict a lattice of cell centers by refitting at each point.

    The same feature context is used at every cell; only the local
    coefficients vary. Values are clamped to [0, 1]; degenerate cells are
    NaN, not zero.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    features = np.asarray(features, dtype=float)
    lon_step = (bbox.lon_max - bbox.lon_min) / resolution
    lat_step = (bbox.lat_max - bbox.lat_min) / resolution
    values = np.full((resolution, resolution), np.nan)
    for i in range(resolution):  # rows: latitude, south to north
        lat = bbox.lat_min + (i + 0.5) * lat_step
        for j in range(resolution):
            lon = bbox.lon_min + (j + 0.5) * lon_step
            try:
                yhat = predict(model, train, GeoPoint(lon=lon, lat=lat), features,
                               mode="refit_at_point")
            except DegenerateFit:
                continue
            values[i, j] = min(1.0, max(0.0, yhat))
    return HeatmapGrid(bbox=bbox, resolution=resolution, values=values,
                       crime_type=crime_type, year=year)


def export_geojson(grid: HeatmapGrid) -> str:
    """GeoJSON FeatureCollection of cell polygons with a "p" property.

    Degenerate cells carry "p": null so renderers can leave them blank.
    """
    b = grid.bbox
    lon_step = (b.lon_max - b.lon_min) / grid.resolution
    lat_step = (b.lat_max - b.lat_min) / grid.resolution
    features = []
    for i in range(grid.resolution):
        for j in range(grid.resolution):
            lon0 = b.lon_min + j * lon_step
            lat0 = b.lat_min + i * lat_step
            lon1 = lon0 + lon_step
            lat1 = lat0 + lat_step
            v = grid.values[i, j]
            features.append({
                "type": "Feature",
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[
                        [lon0, lat0], [lon1, lat0], [lon1, lat1], [lon0, lat1], [lon0, lat0]
                    ]],
                },
                "properties": {
                    "p": None if math.isnan(v) else float(v),
                    "row": i,
                    "col": j,
                },
            })
    doc = {
        "type": "FeatureCollection",
        "bbox": [b.lon_min, b.lat_min, b.lon_max, b.lat_max],
        "crime_type": grid.crime_type,
        "year": grid.year,
        "resolution": grid.resolution,
        "features": features,
    }
    return json.dumps(doc, indent=2)


def grid_from_geojson(text: str) -> HeatmapGrid:
    doc = json.loads(text)
    res = doc["resolution"]
    bbox = BBox(lon_min=doc["bbox"][0], lat_min=doc["bbox"][1],
                lon_max=doc["bbox"][2], lat_max=doc["bbox"][3])
    values = np.full((res, res), np.nan)
    for f in doc["features"]:
        p = f["properties"]
        if p["p"] is not None:
            values[p["row"], p["col"]] = p["p"]
    return HeatmapGrid(bbox=bbox, resolution=res, values=values,
                       crime_type=doc.get("crime_type", ""), year=doc.get("year"))
