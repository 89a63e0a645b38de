#!/usr/bin/env python3
"""Build a complete demo deployment from synthesized source CSVs: ingest,
fit all six crime-type models, export per-type heat maps, and write a
service bundle ready for `crimegwr serve`.

Usage:
    python scripts/make_demo_bundle.py --out-dir runs/demo_service
    crimegwr serve --bundle-dir runs/demo_service/bundle \
        --heatmap-dir runs/demo_service/heatmaps
"""

import argparse
import io
from pathlib import Path

import numpy as np

from crimegwr.experiment import BBox, export_geojson, heatmap
from crimegwr.gwr import KernelSpec
from crimegwr.ingest import (
    CrimeType,
    build_model_rows,
    parse_crimes,
    parse_demographics,
    parse_weather,
)
from crimegwr.service import build_bundle_from_rows, save_bundle

CRIME_NAMES = ["Larceny", "Burglary", "Robbery", "Aggravated Assault",
               "Motor Vehicle Theft", "Murder"]


def synthesize_csvs(out_dir: Path, n_geoids=25, incidents_per_cell=8, seed=7):
    """Plausible-looking demo CSVs over a grid of Rochester-area centroids."""
    rng = np.random.default_rng(seed)
    crimes = ["occurred_at,geoid,lat,lon,crime_type\n"]
    demo = ["geoid,lat,lon,population_density,property_rate,median_age,"
            "eth_share_a,eth_share_b,eth_share_c\n"]
    for g in range(n_geoids):
        lat = 43.10 + 0.15 * ((g // 5) / 4)
        lon = -77.70 + 0.20 * ((g % 5) / 4)
        shares = rng.dirichlet([5, 3, 2])
        demo.append(f"G{g:03d},{lat:.5f},{lon:.5f},"
                    f"{rng.uniform(400, 4000):.1f},"
                    f"{rng.uniform(8e4, 2.5e5):.0f},"
                    f"{rng.uniform(24, 45):.1f},"
                    f"{shares[0]:.4f},{shares[1]:.4f},{shares[2]:.4f}\n")
        for hour in (2, 9, 14, 20):
            for _ in range(incidents_per_cell):
                day = int(rng.integers(1, 28))
                month = int(rng.integers(1, 13))
                ctype = CRIME_NAMES[int(rng.integers(0, 6))]
                crimes.append(f"2015-{month:02d}-{day:02d} {hour:02d}:"
                              f"{int(rng.integers(0, 60)):02d},G{g:03d},"
                              f"{lat:.5f},{lon:.5f},{ctype}\n")
    weather = ["date,avg_temp_f,snowfall_in\n"]
    for month in range(1, 13):
        for day in range(1, 28):
            temp = 25 + 45 * np.sin(np.pi * (month - 1) / 11) + rng.normal(0, 4)
            snow = max(0.0, rng.normal(1, 2)) if temp < 35 else 0.0
            weather.append(f"2015-{month:02d}-{day:02d},{temp:.1f},{snow:.1f}\n")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "crimes.csv").write_text("".join(crimes))
    (out_dir / "demographics.csv").write_text("".join(demo))
    (out_dir / "weather.csv").write_text("".join(weather))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("runs/demo_service"))
    ap.add_argument("--bandwidth", type=float, default=6.0)
    ap.add_argument("--resolution", type=int, default=25)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    src = args.out_dir / "source"
    synthesize_csvs(src, seed=args.seed)

    incidents, crime_rejects = parse_crimes(
        io.StringIO((src / "crimes.csv").read_text()))
    units, _ = parse_demographics(
        io.StringIO((src / "demographics.csv").read_text()))
    days, _ = parse_weather(io.StringIO((src / "weather.csv").read_text()))
    rows, names, coverage = build_model_rows(incidents, units, days,
                                             min_support=5)
    print(f"ingested {len(incidents)} incidents "
          f"({len(crime_rejects)} rejected) -> {len(rows)} model rows; "
          f"coverage: {coverage}")
    climatology = {m: float(np.mean([d.avg_temp_f for d in days
                                     if d.date.month == m]))
                   for m in range(1, 13)}
    bundle = build_bundle_from_rows(
        rows, names, bandwidth_km=args.bandwidth,
        model_version=f"demo-{args.seed}", climatology=climatology)
    save_bundle(bundle, args.out_dir / "bundle")
    print(f"bundle written to {args.out_dir / 'bundle'}")

    box = BBox(lon_min=-77.70, lon_max=-77.50, lat_min=43.10, lat_max=43.25)
    heat_dir = args.out_dir / "heatmaps"
    heat_dir.mkdir(parents=True, exist_ok=True)
    for ctype in CrimeType:
        model = bundle.models[ctype]
        train = bundle.train[ctype]
        x_bar = np.mean(train.X, axis=0)
        grid = heatmap(model, train, box, args.resolution, features=x_bar,
                       crime_type=ctype.value, year=2015)
        (heat_dir / f"{ctype.value}_2015.geojson").write_text(
            export_geojson(grid))
    print(f"heat maps written to {heat_dir}")
    print("serve with: crimegwr serve --bundle-dir "
          f"{args.out_dir / 'bundle'} --heatmap-dir {heat_dir}")


if __name__ == "__main__":
    main()
