"""HTTP risk-query service: loads a fitted model bundle and answers
location/time queries plus precomputed heat-map lookups.

The bundle is an immutable directory artifact produced by the CLI; reloads
swap the whole bundle atomically.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse, Response

from .geo import GeoPoint, point_to_rows_km
from .gwr import EmptyGeoID, FittedGWR, GWRDataset, predict
from .ingest import CrimeType, Standardization, WeatherDay, time_of_day_features

BUNDLE_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class RiskQuery:
    location: GeoPoint
    hour: int
    month: int
    avg_temp_f: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour out of range: {self.hour}")
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")


@dataclass(frozen=True)
class RiskReport:
    probabilities: dict[CrimeType, float]  # clamped to [0, 1]
    raw: dict[CrimeType, float]
    geoid_resolved: Optional[str]
    mode_used: str
    model_version: str


@dataclass(frozen=True)
class GeoUnitRef:
    """Centroid plus raw demographic feature values for one GeoID."""

    geoid: str
    lon: float
    lat: float
    demo: tuple[float, ...]


@dataclass(frozen=True)
class ModelBundle:
    model_version: str
    feature_names: tuple[str, ...]
    standardization: Standardization
    models: dict[CrimeType, FittedGWR]
    train: dict[CrimeType, GWRDataset]
    geounits: tuple[GeoUnitRef, ...]
    climatology: dict[int, float]  # month -> mean avg_temp_f
    geoid_radius_km: float = 1.0


def climatology_from_weather(days: list[WeatherDay]) -> dict[int, float]:
    by_month: dict[int, list[float]] = {}
    for d in days:
        by_month.setdefault(d.date.month, []).append(d.avg_temp_f)
    return {m: float(np.mean(v)) for m, v in sorted(by_month.items())}


def save_bundle(bundle: ModelBundle, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "version": BUNDLE_SCHEMA_VERSION,
        "model_version": bundle.model_version,
        "feature_names": list(bundle.feature_names),
        "standardization": {
            "mean": [float(v) for v in bundle.standardization.mean],
            "std": [float(v) for v in bundle.standardization.std],
        },
        "crime_types": [t.value for t in bundle.models],
        "geoid_radius_km": bundle.geoid_radius_km,
    }
    (out_dir / "bundle.json").write_text(json.dumps(meta, indent=2))
    for ctype, model in bundle.models.items():
        (out_dir / f"model_{ctype.value}.json").write_text(model.to_json())
        tr = bundle.train[ctype]
        (out_dir / f"train_{ctype.value}.json").write_text(json.dumps({
            "lons": tr.lons.tolist(),
            "lats": tr.lats.tolist(),
            "X": tr.X.tolist(),
            "y": tr.y.tolist(),
            "geoids": list(tr.geoids) if tr.geoids is not None else None,
        }))
    (out_dir / "geounits.json").write_text(json.dumps([
        {"geoid": g.geoid, "lon": g.lon, "lat": g.lat, "demo": list(g.demo)}
        for g in bundle.geounits
    ], indent=2))
    (out_dir / "climatology.json").write_text(json.dumps(
        {str(m): t for m, t in bundle.climatology.items()}, indent=2
    ))


def load_bundle(bundle_dir: Path, climatology_path: Optional[Path] = None) -> ModelBundle:
    bundle_dir = Path(bundle_dir)
    meta = json.loads((bundle_dir / "bundle.json").read_text())
    if meta.get("version") != BUNDLE_SCHEMA_VERSION:
        raise ValueError(f"unsupported bundle version: {meta.get('version')!r}")
    std = Standardization(
        mean=np.asarray(meta["standardization"]["mean"], dtype=float),
        std=np.asarray(meta["standardization"]["std"], dtype=float),
    )
    models: dict[CrimeType, FittedGWR] = {}
    train: dict[CrimeType, GWRDataset] = {}
    for name in meta["crime_types"]:
        ctype = CrimeType(name)
        models[ctype] = FittedGWR.from_json((bundle_dir / f"model_{name}.json").read_text())
        td = json.loads((bundle_dir / f"train_{name}.json").read_text())
        train[ctype] = GWRDataset(
            lons=np.asarray(td["lons"]),
            lats=np.asarray(td["lats"]),
            X=np.asarray(td["X"]),
            y=np.asarray(td["y"]),
            geoids=tuple(td["geoids"]) if td["geoids"] is not None else None,
        )
    geounits = tuple(
        GeoUnitRef(geoid=g["geoid"], lon=g["lon"], lat=g["lat"], demo=tuple(g["demo"]))
        for g in json.loads((bundle_dir / "geounits.json").read_text())
    )
    clim_path = climatology_path or bundle_dir / "climatology.json"
    climatology = {int(m): float(t) for m, t in json.loads(Path(clim_path).read_text()).items()}
    return ModelBundle(
        model_version=meta["model_version"],
        feature_names=tuple(meta["feature_names"]),
        standardization=std,
        models=models,
        train=train,
        geounits=geounits,
        climatology=climatology,
        geoid_radius_km=meta.get("geoid_radius_km", 1.0),
    )


def _nearest_geounit(bundle: ModelBundle, point: GeoPoint) -> tuple[GeoUnitRef, float]:
    lons = np.array([g.lon for g in bundle.geounits])
    lats = np.array([g.lat for g in bundle.geounits])
    d = point_to_rows_km(point, lons, lats)
    k = int(np.argmin(d))
    return bundle.geounits[k], float(d[k])


def build_query_features(bundle: ModelBundle, query: RiskQuery, demo: tuple[float, ...]) -> np.ndarray:
    """Assemble and standardize the feature vector for one query."""
    bucket, indicators = time_of_day_features_from_hour(query.hour)
    temp = query.avg_temp_f
    if temp is None:
        if query.month not in bundle.climatology:
            raise ValueError(f"no climatology for month {query.month}")
        temp = bundle.climatology[query.month]
    raw = np.array([1.0, *demo, *(float(v) for v in indicators), float(temp)])
    if raw.shape != bundle.standardization.mean.shape:
        raise ValueError("geounit demographic vector does not match model features")
    x = bundle.standardization.apply(raw)
    x[0] = 1.0
    return x


def time_of_day_features_from_hour(hour: int):
    from datetime import datetime

    return time_of_day_features(datetime(2000, 1, 1, hour, 0))


def risk_report(bundle: ModelBundle, query: RiskQuery) -> RiskReport:
    """Predict all six per-type probabilities for one location/time query.

    Prediction uses GeoID-averaged coefficients when the point lies within
    the resolution radius of a known centroid, else a fresh local fit at the
    query point. Reported probabilities are clamped to [0, 1]; raw values
    are kept alongside.
    """
    unit, dist_km = _nearest_geounit(bundle, query.location)
    resolved = unit.geoid if dist_km <= bundle.geoid_radius_km else None
    x = build_query_features(bundle, query, unit.demo)
    raw: dict[CrimeType, float] = {}
    mode_used = "refit_at_point"
    for ctype, model in bundle.models.items():
        train = bundle.train[ctype]
        if resolved is not None:
            try:
                yhat = predict(model, train, query.location, x,
                               mode="geoid_average", geoid=resolved)
                mode_used = "geoid_average"
            except EmptyGeoID:
                yhat = predict(model, train, query.location, x, mode="refit_at_point")
        else:
            yhat = predict(model, train, query.location, x, mode="refit_at_point")
        raw[ctype] = float(yhat)
    probabilities = {t: min(1.0, max(0.0, v)) for t, v in raw.items()}
    return RiskReport(
        probabilities=probabilities,
        raw=raw,
        geoid_resolved=resolved,
        mode_used=mode_used,
        model_version=bundle.model_version,
    )


def build_bundle_from_rows(
    rows,
    names,
    bandwidth_km: Optional[float] = None,
    bandwidth_grid=None,
    model_version: str = "dev",
    geoid_radius_km: float = 1.0,
    climatology: Optional[dict[int, float]] = None,
) -> ModelBundle:
    """Fit one model per crime type over all rows and pack the service bundle.

    Standardization constants come from these rows (they are the deployed
    training data). The demographic block of each GeoID's raw feature vector
    is kept for query-time feature assembly.
    """
    from .gwr import KernelSpec, fit, select_bandwidth
    from .ingest import compute_standardization, rows_to_dataset

    std = compute_standardization(rows, names)
    models: dict[CrimeType, FittedGWR] = {}
    train: dict[CrimeType, GWRDataset] = {}
    for ctype in CrimeType:
        data, _ = rows_to_dataset(rows, ctype, standardization=std)
        if bandwidth_km is not None:
            h = bandwidth_km
        elif bandwidth_grid is not None:
            h, _scores = select_bandwidth(data, list(bandwidth_grid))
        else:
            raise ValueError("give bandwidth_km or bandwidth_grid")
        models[ctype] = fit(data, KernelSpec(bandwidth_km=h), feature_names=names)
        train[ctype] = data

    p = len(names)
    seen: dict[str, GeoUnitRef] = {}
    for r in rows:
        if r.geoid not in seen:
            seen[r.geoid] = GeoUnitRef(
                geoid=r.geoid,
                lon=r.location.lon,
                lat=r.location.lat,
                demo=tuple(float(v) for v in r.features[1:p - 4]),
            )
    return ModelBundle(
        model_version=model_version,
        feature_names=tuple(names),
        standardization=std,
        models=models,
        train=train,
        geounits=tuple(seen.values()),
        climatology=climatology or {m: 50.0 for m in range(1, 13)},
        geoid_radius_km=geoid_radius_km,
    )


class ModelStore:
    """Holds the currently served bundle; swap is a single reference write."""

    def __init__(self, bundle: Optional[ModelBundle] = None,
                 heatmap_dir: Optional[Path] = None):
        self.bundle = bundle
        self.heatmap_dir = Path(heatmap_dir) if heatmap_dir else None

    def load(self, bundle_dir: Path, climatology_path: Optional[Path] = None) -> None:
        self.bundle = load_bundle(bundle_dir, climatology_path)


@dataclass(frozen=True)
class ServiceConfig:
    """Resolved from a TOML file and/or CRIMEGWR_* environment overrides."""

    listen: str = "127.0.0.1:8000"
    bundle_dir: Optional[str] = None
    heatmap_dir: Optional[str] = None
    climatology_path: Optional[str] = None

    @classmethod
    def resolve(cls, toml_text: Optional[str] = None) -> "ServiceConfig":
        import tomli

        doc = tomli.loads(toml_text) if toml_text else {}
        def pick(key, default=None):
            return os.environ.get(f"CRIMEGWR_{key.upper()}", doc.get(key, default))
        return cls(
            listen=pick("listen", "127.0.0.1:8000"),
            bundle_dir=pick("bundle_dir"),
            heatmap_dir=pick("heatmap_dir"),
            climatology_path=pick("climatology_path"),
        )


def create_app(store: ModelStore) -> FastAPI:
    app = FastAPI(title="crime risk service")

    @app.get("/api/health")
    def health():
        if store.bundle is None:
            return {"status": "loading", "model_version": None, "locals_count": 0}
        first = next(iter(store.bundle.models.values()))
        return {
            "status": "ok",
            "model_version": store.bundle.model_version,
            "locals_count": len(first.local_fits),
        }

    @app.get("/api/risk")
    def risk(
        lat: float = Query(ge=-90, le=90),
        lon: float = Query(ge=-180, le=180),
        hour: int = Query(ge=0, le=23),
        month: int = Query(ge=1, le=12),
        temp_f: Optional[float] = Query(default=None, ge=-60, le=130),
    ):
        if store.bundle is None:
            raise HTTPException(status_code=503, detail="model loading")
        query = RiskQuery(location=GeoPoint(lon=lon, lat=lat), hour=hour,
                          month=month, avg_temp_f=temp_f)
        report = risk_report(store.bundle, query)
        return {
            "lat": lat,
            "lon": lon,
            "hour": hour,
            "month": month,
            "temp_f": temp_f,
            "probabilities": {t.value: report.probabilities[t] for t in CrimeType
                              if t in report.probabilities},
            "raw": {t.value: report.raw[t] for t in CrimeType if t in report.raw},
            "geoid": report.geoid_resolved,
            "mode": report.mode_used,
            "model_version": report.model_version,
        }

    @app.get("/api/heatmap/{crime_type}/{year}")
    def heatmap(crime_type: str, year: int):
        allowed = [t.value for t in CrimeType]
        if crime_type not in allowed:
            raise HTTPException(status_code=404, detail={
                "error": f"unknown crime type: {crime_type}", "allowed": allowed,
            })
        if store.heatmap_dir is None:
            raise HTTPException(status_code=404, detail="no heat-map directory configured")
        path = store.heatmap_dir / f"{crime_type}_{year}.geojson"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no heat map for {crime_type}/{year}")
        return Response(content=path.read_text(), media_type="application/geo+json")

    return app
