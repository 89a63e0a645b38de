"""Command-line pipeline: synthetic data, fitting, holdout evaluation,
heat maps, descriptive stats, ingestion, bundle building and serving."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import click
import numpy as np

from . import experiment as exp
from . import gwr, ingest, service, stats
from .geo import GeoPoint

DATASET_SCHEMA_VERSION = "1"


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def dataset_to_json(data: gwr.GWRDataset, years, feature_names, true_beta=None,
                    bbox=None) -> str:
    rows = []
    for i in range(data.n):
        row = {
            "geoid": data.row_geoid(i),
            "lon": float(data.lons[i]),
            "lat": float(data.lats[i]),
            "year": int(years[i]),
            "features": data.X[i].tolist(),
            "y": float(data.y[i]),
        }
        if true_beta is not None:
            row["true_beta"] = true_beta[i].tolist()
        rows.append(row)
    doc = {
        "version": DATASET_SCHEMA_VERSION,
        "feature_names": list(feature_names),
        "rows": rows,
    }
    if bbox is not None:
        doc["bbox"] = [bbox.lon_min, bbox.lat_min, bbox.lon_max, bbox.lat_max]
    return json.dumps(doc, indent=2)


def dataset_from_json(text: str):
    doc = json.loads(text)
    if doc.get("version") != DATASET_SCHEMA_VERSION:
        raise click.ClickException(f"unsupported dataset version: {doc.get('version')!r}")
    rows = doc["rows"]
    data = gwr.GWRDataset(
        lons=np.array([r["lon"] for r in rows]),
        lats=np.array([r["lat"] for r in rows]),
        X=np.array([r["features"] for r in rows]),
        y=np.array([r["y"] for r in rows]),
        geoids=tuple(r["geoid"] for r in rows),
    )
    years = np.array([r["year"] for r in rows])
    bbox = None
    if "bbox" in doc:
        b = doc["bbox"]
        bbox = exp.BBox(lon_min=b[0], lat_min=b[1], lon_max=b[2], lat_max=b[3])
    return data, years, doc["feature_names"], bbox


@click.group()
def main():
    """Spatially varying crime-risk regression toolkit."""


@main.command()
@click.option("--n-locations", default=100, show_default=True)
@click.option("--rows-per-location", default=4, show_default=True)
@click.option("--bbox", default="-77.70,43.10,-77.50,43.25", show_default=True,
              help="lon_min,lat_min,lon_max,lat_max")
@click.option("--noise-sigma", default=0.05, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--years", default="2015,2016", show_default=True)
@click.option("--out", required=True, type=click.Path())
def synthetic(n_locations, rows_per_location, bbox, noise_sigma, seed, years, out):
    """Generate a synthetic dataset with known coefficient surfaces."""
    lon_min, lat_min, lon_max, lat_max = (float(v) for v in bbox.split(","))
    spec = exp.SyntheticSpec(
        n_locations=n_locations,
        rows_per_location=rows_per_location,
        bbox=exp.BBox(lon_min=lon_min, lon_max=lon_max, lat_min=lat_min, lat_max=lat_max),
        surfaces=(
            exp.CoefficientSurface(kind="linear_lon", base=1.0, slope=1.0),
            exp.CoefficientSurface(kind="sin_lat", amplitude=1.0),
            exp.CoefficientSurface(kind="constant", value=0.5),
        ),
        noise_sigma=noise_sigma,
        seed=seed,
        years=tuple(int(y) for y in years.split(",")),
    )
    syn = exp.generate_synthetic(spec)
    names = ["intercept", "x1", "x2"]
    _write(out, dataset_to_json(syn.dataset, syn.years, names,
                                true_beta=syn.true_beta, bbox=spec.bbox))
    click.echo(f"wrote {syn.dataset.n} rows to {out}")


def _resolve_bandwidth(data, bandwidth, grid_size):
    if bandwidth is not None:
        return float(bandwidth), None
    grid = gwr.default_bandwidth_grid(data, num=grid_size)
    h, scores = gwr.select_bandwidth(data, grid)
    return h, scores


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--bandwidth", type=float, default=None, help="fixed bandwidth in km")
@click.option("--grid-size", default=16, show_default=True,
              help="CV grid size when no fixed bandwidth is given")
@click.option("--out", required=True, type=click.Path())
def fit(data_path, bandwidth, grid_size, out):
    """Fit local models at every training location."""
    data, _, names, _ = dataset_from_json(Path(data_path).read_text())
    h, _ = _resolve_bandwidth(data, bandwidth, grid_size)
    model = gwr.fit(data, gwr.KernelSpec(bandwidth_km=h), feature_names=names)
    _write(out, model.to_json())
    click.echo(f"fit {len(model.local_fits)} locations at h={h:.4g} km, "
               f"R^2={model.diagnostics.global_r_squared:.4f}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--test-fraction", default=0.2, show_default=True)
@click.option("--bandwidth", type=float, default=None)
@click.option("--grid-size", default=16, show_default=True)
@click.option("--shared-bandwidth", is_flag=True,
              help="select one bandwidth on all training data instead of per year")
@click.option("--scatter-out", required=True, type=click.Path())
@click.option("--metrics-out", required=True, type=click.Path())
def evaluate(data_path, seed, test_fraction, bandwidth, grid_size,
             shared_bandwidth, scatter_out, metrics_out):
    """Per-year holdout evaluation with GeoID-averaged prediction."""
    data, years, names, _ = dataset_from_json(Path(data_path).read_text())
    split_spec = exp.SplitSpec(test_fraction=test_fraction, seed=seed)
    kwargs = {}
    if bandwidth is not None:
        kwargs["bandwidth_km"] = bandwidth
    elif shared_bandwidth:
        h, _ = _resolve_bandwidth(data, None, grid_size)
        kwargs["bandwidth_km"] = h
    else:
        kwargs["bandwidth_grid"] = gwr.default_bandwidth_grid(data, num=grid_size).tolist()
    results = exp.run_yearly_evaluation(data, years, split_spec,
                                        feature_names=names, **kwargs)
    _write(scatter_out, exp.scatter_csv(results))
    metrics = {
        str(yr): {
            "r2": r.r2,
            "bandwidth_km": r.bandwidth_km,
            "n_pairs": len(r.pairs),
            "refit_fallbacks": r.refit_fallbacks,
        }
        for yr, r in sorted(results.items())
    }
    _write(metrics_out, json.dumps(metrics, indent=2))
    for yr, r in sorted(results.items()):
        click.echo(f"{yr}: R^2={r.r2:.4f} h={r.bandwidth_km:.4g} km "
                   f"({len(r.pairs)} test rows, {r.refit_fallbacks} refit fallbacks)")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True),
              help="training dataset the model was fit on")
@click.option("--bbox", default=None, help="lon_min,lat_min,lon_max,lat_max; "
              "defaults to the dataset's bbox")
@click.option("--resolution", default=20, show_default=True)
@click.option("--features", default=None,
              help="comma-separated feature context; defaults to column means")
@click.option("--crime-type", default="", help="label recorded in the output")
@click.option("--year", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
def heatmap(model_path, data_path, bbox, resolution, features, crime_type, year, out):
    """Predict a lattice over the bbox and export it as GeoJSON."""
    model = gwr.FittedGWR.from_json(Path(model_path).read_text())
    data, _, _, data_bbox = dataset_from_json(Path(data_path).read_text())
    if bbox is not None:
        lon_min, lat_min, lon_max, lat_max = (float(v) for v in bbox.split(","))
        box = exp.BBox(lon_min=lon_min, lon_max=lon_max, lat_min=lat_min, lat_max=lat_max)
    elif data_bbox is not None:
        box = data_bbox
    else:
        box = exp.BBox(lon_min=float(data.lons.min()), lon_max=float(data.lons.max()),
                       lat_min=float(data.lats.min()), lat_max=float(data.lats.max()))
    if features is not None:
        context = np.array([float(v) for v in features.split(",")])
    else:
        context = data.X.mean(axis=0)
        context[0] = 1.0
    grid = exp.heatmap(model, data, box, resolution, context,
                       crime_type=crime_type, year=year)
    _write(out, exp.export_geojson(grid))
    finite = grid.values[np.isfinite(grid.values)]
    click.echo(f"wrote {resolution}x{resolution} grid to {out} "
               f"({finite.size} cells, range [{finite.min():.4f}, {finite.max():.4f}])")


def _read_colmap(column_map):
    if column_map is None:
        return ingest.ColumnMap()
    return ingest.ColumnMap.from_toml(Path(column_map).read_text())


def rows_to_json(rows, names) -> str:
    return json.dumps({
        "version": DATASET_SCHEMA_VERSION,
        "feature_names": list(names),
        "rows": [
            {
                "geoid": r.geoid,
                "lon": r.location.lon,
                "lat": r.location.lat,
                "year": r.year,
                "time_bucket": r.time_bucket,
                "features": r.features.tolist(),
                "responses": {t.value: r.responses[t] for t in ingest.CrimeType},
                "support": r.support,
            }
            for r in rows
        ],
    }, indent=2)


def rows_from_json(text: str):
    doc = json.loads(text)
    rows = [
        ingest.ModelRow(
            geoid=r["geoid"],
            location=GeoPoint(lon=r["lon"], lat=r["lat"]),
            year=r["year"],
            time_bucket=r["time_bucket"],
            features=np.asarray(r["features"]),
            responses={ingest.CrimeType(k): v for k, v in r["responses"].items()},
            support=r["support"],
        )
        for r in doc["rows"]
    ]
    return rows, doc["feature_names"]


@main.command(name="ingest")
@click.option("--crimes", required=True, type=click.Path(exists=True))
@click.option("--demographics", required=True, type=click.Path(exists=True))
@click.option("--weather", required=True, type=click.Path(exists=True))
@click.option("--column-map", default=None, type=click.Path(exists=True),
              help="TOML column-name mapping")
@click.option("--min-support", default=ingest.DEFAULT_MIN_SUPPORT, show_default=True)
@click.option("--rows-out", required=True, type=click.Path())
@click.option("--rejects-dir", default=None, type=click.Path())
@click.option("--coverage-out", default=None, type=click.Path())
def ingest_cmd(crimes, demographics, weather, column_map, min_support,
               rows_out, rejects_dir, coverage_out):
    """Join the three sources into regression-ready model rows."""
    cm = _read_colmap(column_map)
    with open(crimes) as f:
        incidents, crime_rejects = ingest.parse_crimes(f, cm)
    with open(demographics) as f:
        units, demo_rejects = ingest.parse_demographics(f, cm)
    with open(weather) as f:
        days, weather_rejects = ingest.parse_weather(f, cm)
    rows, names, coverage = ingest.build_model_rows(incidents, units, days,
                                                    min_support=min_support)
    _write(rows_out, rows_to_json(rows, names))
    if rejects_dir:
        for name, rejects in [("crimes", crime_rejects), ("demographics", demo_rejects),
                              ("weather", weather_rejects)]:
            _write(str(Path(rejects_dir) / f"rejects_{name}.csv"),
                   ingest.write_rejects_csv(rejects))
    if coverage_out:
        _write(coverage_out, json.dumps(coverage, indent=2))
    click.echo(f"{len(rows)} model rows from {len(incidents)} incidents "
               f"({len(crime_rejects)} crime rejects)")


def _histogram_csv(hist: stats.Histogram) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_label", "count", "percentage"])
    for label, count, pct in zip(hist.labels, hist.counts, hist.percentages):
        writer.writerow([label, int(count), repr(float(pct))])
    return buf.getvalue()


@main.command(name="stats")
@click.option("--crimes", required=True, type=click.Path(exists=True))
@click.option("--weather", required=True, type=click.Path(exists=True))
@click.option("--column-map", default=None, type=click.Path(exists=True))
@click.option("--crime-type", "crime_filter", default=None,
              type=click.Choice([t.value for t in ingest.CrimeType]))
@click.option("--temp-bin-width", default=stats.DEFAULT_TEMP_BIN_WIDTH_F, show_default=True)
@click.option("--rows", "rows_path", default=None, type=click.Path(exists=True),
              help="model rows for feature/response correlation")
@click.option("--out-dir", required=True, type=click.Path())
def stats_cmd(crimes, weather, column_map, crime_filter, temp_bin_width,
              rows_path, out_dir):
    """Descriptive histograms and correlation checks, as CSV plus a JSON summary."""
    cm = _read_colmap(column_map)
    with open(crimes) as f:
        incidents, _ = ingest.parse_crimes(f, cm)
    with open(weather) as f:
        days, _ = ingest.parse_weather(f, cm)
    cfilter = ingest.CrimeType(crime_filter) if crime_filter else None

    out = Path(out_dir)
    hour = stats.hour_histogram(incidents, cfilter)
    month = stats.month_histogram(incidents, cfilter)
    temp = stats.temperature_histogram(incidents, days, cfilter, bin_width_f=temp_bin_width)
    profile = stats.month_temperature_profile(incidents, days)

    _write(str(out / "hour_histogram.csv"), _histogram_csv(hour))
    _write(str(out / "month_histogram.csv"), _histogram_csv(month))
    _write(str(out / "temperature_histogram.csv"), _histogram_csv(temp))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["month", "crime_percentage", "mean_temp_f"])
    for m, pct, t in profile:
        writer.writerow([m, repr(pct), repr(t)])
    _write(str(out / "month_temperature_profile.csv"), buf.getvalue())

    summary = {
        "hour_modes": hour.modes(),
        "month_modes": month.modes(),
        "temperature_modes": temp.modes(),
        "temperature_mode_labels": [temp.labels[i] for i in temp.modes()],
    }
    try:
        summary["shift_change_pearson_r"] = stats.shift_change_correlation(hour)
    except stats.ConstantInput:
        summary["shift_change_pearson_r"] = None
    if rows_path:
        rows, names = rows_from_json(Path(rows_path).read_text())
        r, pairs = stats.feature_response_correlation(
            rows, "property_rate", names, ingest.CrimeType.BURGLARY)
        summary["property_rate_vs_burglary_r"] = r
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["property_rate", "burglary_share"])
        for a, b in pairs:
            writer.writerow([repr(a), repr(b)])
        _write(str(out / "property_rate_vs_burglary.csv"), buf.getvalue())
    _write(str(out / "summary.json"), json.dumps(summary, indent=2))
    click.echo(f"wrote descriptive statistics to {out_dir}")


@main.command()
@click.option("--rows", "rows_path", required=True, type=click.Path(exists=True))
@click.option("--weather", default=None, type=click.Path(exists=True),
              help="weather CSV for the monthly temperature climatology")
@click.option("--column-map", default=None, type=click.Path(exists=True))
@click.option("--bandwidth", type=float, default=None)
@click.option("--grid-size", default=16, show_default=True)
@click.option("--model-version", default="dev", show_default=True)
@click.option("--geoid-radius-km", default=1.0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def bundle(rows_path, weather, column_map, bandwidth, grid_size, model_version,
           geoid_radius_km, out_dir):
    """Fit all six crime-type models and pack the service bundle."""
    rows, names = rows_from_json(Path(rows_path).read_text())
    climatology = None
    if weather:
        with open(weather) as f:
            days, _ = ingest.parse_weather(f, _read_colmap(column_map))
        climatology = service.climatology_from_weather(days)
    kwargs = {"bandwidth_km": bandwidth} if bandwidth is not None else {}
    if bandwidth is None:
        data, _ = ingest.rows_to_dataset(rows, ingest.CrimeType.LARCENY)
        kwargs["bandwidth_grid"] = gwr.default_bandwidth_grid(data, num=grid_size).tolist()
    b = service.build_bundle_from_rows(
        rows, names, model_version=model_version,
        geoid_radius_km=geoid_radius_km, climatology=climatology, **kwargs)
    service.save_bundle(b, Path(out_dir))
    click.echo(f"wrote bundle ({len(b.geounits)} geounits) to {out_dir}")


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--bundle-dir", default=None, type=click.Path(exists=True))
@click.option("--heatmap-dir", default=None, type=click.Path(exists=True))
@click.option("--listen", default=None, help="host:port")
def serve(config_path, bundle_dir, heatmap_dir, listen):
    """Run the HTTP risk service."""
    import uvicorn

    toml_text = Path(config_path).read_text() if config_path else None
    cfg = service.ServiceConfig.resolve(toml_text)
    bundle_dir = bundle_dir or cfg.bundle_dir
    heatmap_dir = heatmap_dir or cfg.heatmap_dir
    listen = listen or cfg.listen
    if bundle_dir is None:
        raise click.ClickException("no bundle directory configured")
    store = service.ModelStore(heatmap_dir=heatmap_dir)
    store.load(Path(bundle_dir),
               Path(cfg.climatology_path) if cfg.climatology_path else None)
    app = service.create_app(store)
    host, _, port = listen.partition(":")
    uvicorn.run(app, host=host, port=int(port or 8000))


if __name__ == "__main__":
    main()
