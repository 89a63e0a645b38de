"""Parse and join the three source datasets (crime incidents, per-GeoID
demographics, daily weather) into regression-ready rows.

Each cell (geoid, year, time bucket) becomes one row whose responses are the
per-crime-type shares of the cell's incidents; the six shares partition to 1.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np
import tomli

from .geo import GeoPoint


class IngestError(Exception):
    pass


class MalformedHeader(IngestError):
    pass


class EmptyInput(IngestError):
    pass


class UnknownGeoID(IngestError):
    def __init__(self, geoids: Sequence[str]):
        super().__init__(f"incidents reference unknown GeoIDs: {sorted(set(geoids))}")
        self.geoids = sorted(set(geoids))


class WeatherGap(IngestError):
    pass


class CrimeType(str, enum.Enum):
    AGGRAVATED_ASSAULT = "aggravated_assault"
    BURGLARY = "burglary"
    LARCENY = "larceny"
    MOTOR_VEHICLE_THEFT = "motor_vehicle_theft"
    MURDER = "murder"
    ROBBERY = "robbery"


def _parse_crime_type(raw: str) -> CrimeType:
    key = raw.strip().lower().replace(" ", "_").replace("-", "_")
    return CrimeType(key)


TIME_BUCKET_NAMES = ("night", "morning", "afternoon", "evening")


def time_of_day_features(t: datetime) -> tuple[int, tuple[int, int, int]]:
    """Six-hour bucket of a timestamp plus its three dummy indicators.

    Buckets are half-open: night [00,06), morning [06,12), afternoon [12,18),
    evening [18,24). Night is the reference level, so the indicator triple is
    (morning, afternoon, evening).
    """
    bucket = t.hour // 6
    indicators = tuple(1 if bucket == b else 0 for b in (1, 2, 3))
    return bucket, indicators


@dataclass(frozen=True)
class CrimeIncident:
    occurred_at: datetime
    geoid: str
    location: GeoPoint
    crime_type: CrimeType


@dataclass(frozen=True)
class GeoUnit:
    geoid: str
    centroid: GeoPoint
    population_density: float
    property_rate: float
    ethnicity_shares: tuple[float, ...]
    median_age: float


@dataclass(frozen=True)
class WeatherDay:
    date: date
    avg_temp_f: float
    snowfall_in: float


@dataclass(frozen=True)
class ModelRow:
    geoid: str
    location: GeoPoint
    year: int
    time_bucket: int
    features: np.ndarray
    responses: dict[CrimeType, float]
    support: int


@dataclass(frozen=True)
class Reject:
    line_no: int
    reason: str


# Default CSV column names for each source; overridable via a TOML mapping
# file with [crimes], [demographics], [weather] tables.
@dataclass(frozen=True)
class ColumnMap:
    crimes: dict = field(default_factory=lambda: {
        "occurred_at": "occurred_at",
        "geoid": "geoid",
        "lat": "lat",
        "lon": "lon",
        "crime_type": "crime_type",
    })
    demographics: dict = field(default_factory=lambda: {
        "geoid": "geoid",
        "lat": "lat",
        "lon": "lon",
        "population_density": "population_density",
        "property_rate": "property_rate",
        "median_age": "median_age",
        "ethnicity_columns": ["eth_share_a", "eth_share_b", "eth_share_c"],
    })
    weather: dict = field(default_factory=lambda: {
        "date": "date",
        "avg_temp_f": "avg_temp_f",
        "snowfall_in": "snowfall_in",
    })

    @classmethod
    def from_toml(cls, text: str) -> "ColumnMap":
        doc = tomli.loads(text)
        base = cls()
        return cls(
            crimes={**base.crimes, **doc.get("crimes", {})},
            demographics={**base.demographics, **doc.get("demographics", {})},
            weather={**base.weather, **doc.get("weather", {})},
        )


def _reader(stream: TextIO, required: Iterable[str], source: str) -> csv.DictReader:
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise EmptyInput(f"{source}: no header row")
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise MalformedHeader(f"{source}: missing columns {missing}")
    return reader


def parse_crimes(
    stream: TextIO, colmap: Optional[ColumnMap] = None
) -> tuple[list[CrimeIncident], list[Reject]]:
    """Parse incident rows; malformed rows go to the rejects list, never dropped."""
    cm = (colmap or ColumnMap()).crimes
    required = [cm["occurred_at"], cm["geoid"], cm["lat"], cm["lon"], cm["crime_type"]]
    reader = _reader(stream, required, "crimes")
    incidents: list[CrimeIncident] = []
    rejects: list[Reject] = []
    for line_no, row in enumerate(reader, start=2):
        try:
            when = datetime.fromisoformat(row[cm["occurred_at"]].strip())
        except (ValueError, AttributeError):
            rejects.append(Reject(line_no, f"unparseable timestamp: {row[cm['occurred_at']]!r}"))
            continue
        try:
            ctype = _parse_crime_type(row[cm["crime_type"]])
        except ValueError:
            rejects.append(Reject(line_no, f"unknown crime type: {row[cm['crime_type']]!r}"))
            continue
        geoid = (row[cm["geoid"]] or "").strip()
        if not geoid:
            rejects.append(Reject(line_no, "empty geoid"))
            continue
        try:
            loc = GeoPoint(lon=float(row[cm["lon"]]), lat=float(row[cm["lat"]]))
        except (TypeError, ValueError) as exc:
            rejects.append(Reject(line_no, f"bad coordinates: {exc}"))
            continue
        incidents.append(CrimeIncident(occurred_at=when, geoid=geoid, location=loc, crime_type=ctype))
    return incidents, rejects


# Ethnicity share sums inside this band are renormalized; outside it the row
# is rejected as inconsistent.
SHARE_SUM_BAND = (0.98, 1.02)


def parse_demographics(
    stream: TextIO, colmap: Optional[ColumnMap] = None
) -> tuple[list[GeoUnit], list[Reject]]:
    cm = (colmap or ColumnMap()).demographics
    eth_cols = list(cm["ethnicity_columns"])
    required = [cm["geoid"], cm["lat"], cm["lon"], cm["population_density"],
                cm["property_rate"], cm["median_age"], *eth_cols]
    reader = _reader(stream, required, "demographics")
    units: list[GeoUnit] = []
    rejects: list[Reject] = []
    for line_no, row in enumerate(reader, start=2):
        try:
            geoid = row[cm["geoid"]].strip()
            centroid = GeoPoint(lon=float(row[cm["lon"]]), lat=float(row[cm["lat"]]))
            pop = float(row[cm["population_density"]])
            prop = float(row[cm["property_rate"]])
            age = float(row[cm["median_age"]])
            shares = np.array([float(row[c]) for c in eth_cols])
        except (TypeError, ValueError, AttributeError) as exc:
            rejects.append(Reject(line_no, f"bad field: {exc}"))
            continue
        if not geoid:
            rejects.append(Reject(line_no, "empty geoid"))
            continue
        if pop < 0 or prop < 0 or age <= 0:
            rejects.append(Reject(line_no, "negative density/rate or nonpositive age"))
            continue
        if np.any(shares < 0) or np.any(shares > 1):
            rejects.append(Reject(line_no, "ethnicity share outside [0, 1]"))
            continue
        total = float(shares.sum())
        if not SHARE_SUM_BAND[0] <= total <= SHARE_SUM_BAND[1]:
            rejects.append(Reject(line_no, f"ethnicity shares sum to {total:.4f}"))
            continue
        shares = shares / total
        units.append(GeoUnit(
            geoid=geoid, centroid=centroid, population_density=pop,
            property_rate=prop, ethnicity_shares=tuple(float(s) for s in shares),
            median_age=age,
        ))
    return units, rejects


def parse_weather(
    stream: TextIO, colmap: Optional[ColumnMap] = None
) -> tuple[list[WeatherDay], list[Reject]]:
    cm = (colmap or ColumnMap()).weather
    required = [cm["date"], cm["avg_temp_f"], cm["snowfall_in"]]
    reader = _reader(stream, required, "weather")
    days: list[WeatherDay] = []
    rejects: list[Reject] = []
    for line_no, row in enumerate(reader, start=2):
        try:
            when = date.fromisoformat(row[cm["date"]].strip())
            temp = float(row[cm["avg_temp_f"]])
            snow = float(row[cm["snowfall_in"]])
        except (TypeError, ValueError, AttributeError) as exc:
            rejects.append(Reject(line_no, f"bad field: {exc}"))
            continue
        if snow < 0 or not -60 <= temp <= 130:
            rejects.append(Reject(line_no, "temperature or snowfall out of range"))
            continue
        days.append(WeatherDay(date=when, avg_temp_f=temp, snowfall_in=snow))
    return days, rejects


def weather_by_date(
    days: Sequence[WeatherDay], needed: Iterable[date]
) -> tuple[dict[date, float], list[date]]:
    """Temperature lookup covering every needed date.

    Dates absent from the table are linearly interpolated between the nearest
    recorded neighbors and reported back as interpolated. Needed dates outside
    the recorded range raise WeatherGap.
    """
    table = {d.date: d.avg_temp_f for d in days}
    if not table:
        raise WeatherGap("weather table is empty")
    known = sorted(table)
    out: dict[date, float] = {}
    interpolated: list[date] = []
    for day in needed:
        if day in table:
            out[day] = table[day]
            continue
        if day < known[0] or day > known[-1]:
            raise WeatherGap(f"no weather on or beyond {day}; cannot interpolate at range end")
        before = max(d for d in known if d < day)
        after = min(d for d in known if d > day)
        span = (after - before).days
        frac = (day - before).days / span
        out[day] = table[before] + frac * (table[after] - table[before])
        interpolated.append(day)
    return out, interpolated


def feature_names(geounits: Sequence[GeoUnit]) -> list[str]:
    n_eth = len(geounits[0].ethnicity_shares)
    eth = [f"eth_share_{i}" for i in range(1, n_eth)]  # first share is the reference
    return ["intercept", "population_density", "property_rate", *eth,
            "median_age", "is_morning", "is_afternoon", "is_evening", "avg_temp_f"]


DEFAULT_MIN_SUPPORT = 5


def build_model_rows(
    incidents: Sequence[CrimeIncident],
    geounits: Sequence[GeoUnit],
    weather: Sequence[WeatherDay],
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> tuple[list[ModelRow], list[str], dict]:
    """Aggregate incidents into (geoid, year, time bucket) cells.

    Returns the rows, the shared feature name list, and a coverage report
    (cells kept/excluded, interpolated weather dates).
    """
    if not geounits:
        raise IngestError("no geographic units supplied")
    units = {g.geoid: g for g in geounits}
    unknown = [i.geoid for i in incidents if i.geoid not in units]
    if unknown:
        raise UnknownGeoID(unknown)

    temps, interpolated = weather_by_date(weather, {i.occurred_at.date() for i in incidents})

    cells: dict[tuple[str, int, int], list[CrimeIncident]] = {}
    for inc in incidents:
        bucket, _ = time_of_day_features(inc.occurred_at)
        cells.setdefault((inc.geoid, inc.occurred_at.year, bucket), []).append(inc)

    names = feature_names(geounits)
    rows: list[ModelRow] = []
    excluded = 0
    for (geoid, year, bucket) in sorted(cells):
        members = cells[(geoid, year, bucket)]
        support = len(members)
        if support < min_support:
            excluded += 1
            continue
        unit = units[geoid]
        counts = {t: 0 for t in CrimeType}
        for inc in members:
            counts[inc.crime_type] += 1
        responses = {t: counts[t] / support for t in CrimeType}
        mean_temp = float(np.mean([temps[inc.occurred_at.date()] for inc in members]))
        indicators = [1.0 if bucket == b else 0.0 for b in (1, 2, 3)]
        features = np.array([
            1.0,
            unit.population_density,
            unit.property_rate,
            *unit.ethnicity_shares[1:],
            unit.median_age,
            *indicators,
            mean_temp,
        ])
        rows.append(ModelRow(
            geoid=geoid, location=unit.centroid, year=year, time_bucket=bucket,
            features=features, responses=responses, support=support,
        ))
    coverage = {
        "cells_total": len(cells),
        "cells_kept": len(rows),
        "cells_excluded_low_support": excluded,
        "min_support": min_support,
        "incidents": len(incidents),
        "interpolated_weather_dates": [d.isoformat() for d in sorted(interpolated)],
    }
    return rows, names, coverage


@dataclass(frozen=True)
class Standardization:
    """Per-feature z-score constants; identity at intercept and indicators."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=float) - self.mean) / self.std


# Feature names never standardized (constant column and dummy indicators).
_UNSCALED = {"intercept", "is_morning", "is_afternoon", "is_evening"}


def compute_standardization(
    rows: Sequence[ModelRow], names: Sequence[str]
) -> Standardization:
    """z-score constants from a training split; degenerate columns keep std 1."""
    mat = np.array([r.features for r in rows])
    mean = np.zeros(len(names))
    std = np.ones(len(names))
    for j, name in enumerate(names):
        if name in _UNSCALED:
            continue
        mean[j] = mat[:, j].mean()
        s = mat[:, j].std()
        if s > 0:
            std[j] = s
    return Standardization(mean=mean, std=std)


def rows_to_dataset(
    rows: Sequence[ModelRow],
    crime_type: CrimeType,
    standardization: Optional[Standardization] = None,
):
    """ModelRows to a GWRDataset for one crime type's response.

    Pass the training split's Standardization when building test data; with
    None, constants are computed from ``rows`` themselves.
    """
    from .gwr import GWRDataset

    if not rows:
        raise IngestError("no model rows")
    n_feat = len(rows[0].features)
    inferred_names = feature_names_from_length(n_feat)
    if standardization is None:
        standardization = compute_standardization(rows, inferred_names)
    X = np.array([standardization.apply(r.features) for r in rows])
    X[:, 0] = 1.0
    return (
        GWRDataset(
            lons=np.array([r.location.lon for r in rows]),
            lats=np.array([r.location.lat for r in rows]),
            X=X,
            y=np.array([r.responses[crime_type] for r in rows]),
            geoids=tuple(r.geoid for r in rows),
        ),
        standardization,
    )


def feature_names_from_length(n_feat: int) -> list[str]:
    """Reconstruct the canonical feature name list from a vector length."""
    n_eth = n_feat - 8  # intercept, pop, prop, age, 3 indicators, temp
    eth = [f"eth_share_{i}" for i in range(1, n_eth + 1)]
    return ["intercept", "population_density", "property_rate", *eth,
            "median_age", "is_morning", "is_afternoon", "is_evening", "avg_temp_f"]


def write_rejects_csv(rejects: Sequence[Reject]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["line_no", "reason"])
    for r in rejects:
        writer.writerow([r.line_no, r.reason])
    return buf.getvalue()
