import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from crimegwr.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def write_source_csvs(root: Path, n_geoids=12, incidents_per_cell=6):
    """Deterministic three-source fixture big enough to fit all models."""
    rng = np.random.default_rng(99)
    types = ["Larceny", "Burglary", "Robbery", "Aggravated Assault",
             "Motor Vehicle Theft", "Murder"]
    crime_lines = ["occurred_at,geoid,lat,lon,crime_type\n"]
    demo_lines = ["geoid,lat,lon,population_density,property_rate,median_age,"
                  "eth_share_a,eth_share_b,eth_share_c\n"]
    for g in range(n_geoids):
        lat = 43.10 + 0.012 * g
        lon = -77.70 + 0.015 * g
        demo_lines.append(
            f"G{g:03d},{lat},{lon},{500 + 40 * g},{100000 + 9000 * g},"
            f"{28 + g},{0.5 - 0.01 * g},{0.3},{0.2 + 0.01 * g}\n")
        for bucket_hour in (2, 14):
            for k in range(incidents_per_cell):
                day = 1 + (g + k) % 27
                ctype = types[int(rng.integers(0, len(types)))]
                crime_lines.append(
                    f"2015-06-{day:02d} {bucket_hour:02d}:15,G{g:03d},"
                    f"{lat},{lon},{ctype}\n")
    weather_lines = ["date,avg_temp_f,snowfall_in\n"]
    for day in range(1, 31):
        weather_lines.append(f"2015-06-{day:02d},{60 + (day % 10)},0\n")
    (root / "crimes.csv").write_text("".join(crime_lines))
    (root / "demographics.csv").write_text("".join(demo_lines))
    (root / "weather.csv").write_text("".join(weather_lines))


def run(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestSyntheticPipeline:
    def test_synthetic_fit_evaluate_heatmap(self, runner, tmp_path):
        data = tmp_path / "data.json"
        run(runner, ["synthetic", "--n-locations", "40", "--rows-per-location", "4",
                     "--seed", "3", "--out", str(data)])
        doc = json.loads(data.read_text())
        assert len(doc["rows"]) == 160
        assert "true_beta" in doc["rows"][0]

        model = tmp_path / "model.json"
        run(runner, ["fit", "--data", str(data), "--bandwidth", "4.0",
                     "--out", str(model)])
        mdoc = json.loads(model.read_text())
        assert mdoc["kernel"]["bandwidth_km"] == 4.0
        assert len(mdoc["locals"]) == 40

        scatter = tmp_path / "scatter.csv"
        metrics = tmp_path / "metrics.json"
        run(runner, ["evaluate", "--data", str(data), "--seed", "1",
                     "--bandwidth", "4.0", "--scatter-out", str(scatter),
                     "--metrics-out", str(metrics)])
        m = json.loads(metrics.read_text())
        assert set(m) == {"2015", "2016"}
        assert all("r2" in v for v in m.values())
        assert scatter.read_text().startswith("geoid,year,empirical,predicted\n")

        grid = tmp_path / "grid.geojson"
        run(runner, ["heatmap", "--model", str(model), "--data", str(data),
                     "--resolution", "4", "--crime-type", "synthetic",
                     "--year", "2015", "--out", str(grid)])
        g = json.loads(grid.read_text())
        assert g["resolution"] == 4
        assert len(g["features"]) == 16

    def test_fit_with_cv_grid(self, runner, tmp_path):
        data = tmp_path / "data.json"
        run(runner, ["synthetic", "--n-locations", "20", "--rows-per-location", "2",
                     "--seed", "5", "--out", str(data)])
        model = tmp_path / "model.json"
        run(runner, ["fit", "--data", str(data), "--grid-size", "4",
                     "--out", str(model)])
        assert json.loads(model.read_text())["kernel"]["bandwidth_km"] > 0


class TestIngestPipeline:
    def test_ingest_stats_bundle(self, runner, tmp_path):
        write_source_csvs(tmp_path)
        rows = tmp_path / "rows.json"
        coverage = tmp_path / "coverage.json"
        run(runner, ["ingest", "--crimes", str(tmp_path / "crimes.csv"),
                     "--demographics", str(tmp_path / "demographics.csv"),
                     "--weather", str(tmp_path / "weather.csv"),
                     "--rows-out", str(rows),
                     "--rejects-dir", str(tmp_path / "rejects"),
                     "--coverage-out", str(coverage)])
        rdoc = json.loads(rows.read_text())
        assert len(rdoc["rows"]) == 24  # 12 geoids x 2 buckets
        cov = json.loads(coverage.read_text())
        assert cov["cells_kept"] == 24
        assert (tmp_path / "rejects" / "rejects_crimes.csv").exists()

        out = tmp_path / "stats"
        run(runner, ["stats", "--crimes", str(tmp_path / "crimes.csv"),
                     "--weather", str(tmp_path / "weather.csv"),
                     "--rows", str(rows), "--out-dir", str(out)])
        summary = json.loads((out / "summary.json").read_text())
        assert "shift_change_pearson_r" in summary
        assert "property_rate_vs_burglary_r" in summary
        hour_csv = (out / "hour_histogram.csv").read_text().strip().split("\n")
        assert hour_csv[0] == "bin_label,count,percentage"
        assert len(hour_csv) == 25

        bundle_dir = tmp_path / "bundle"
        run(runner, ["bundle", "--rows", str(rows),
                     "--weather", str(tmp_path / "weather.csv"),
                     "--bandwidth", "5.0", "--model-version", "v9",
                     "--out-dir", str(bundle_dir)])
        meta = json.loads((bundle_dir / "bundle.json").read_text())
        assert meta["model_version"] == "v9"
        assert len(meta["crime_types"]) == 6
        assert (bundle_dir / "model_larceny.json").exists()
        assert (bundle_dir / "climatology.json").exists()

        # a served bundle answers queries
        from crimegwr.geo import GeoPoint
        from crimegwr.service import RiskQuery, load_bundle, risk_report

        bundle = load_bundle(bundle_dir)
        report = risk_report(bundle, RiskQuery(
            location=GeoPoint(lon=-77.70, lat=43.10), hour=2, month=6))
        assert len(report.probabilities) == 6
