"""Descriptive statistics over incidents: hour/temperature/month histograms,
month-temperature profile, and correlation checks."""

from __future__ import annotations

import calendar
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ingest import CrimeIncident, CrimeType, ModelRow, WeatherDay, weather_by_date


class EmptyAfterFilter(Exception):
    pass


class ConstantInput(Exception):
    pass


@dataclass(frozen=True)
class Histogram:
    labels: tuple[str, ...]
    counts: np.ndarray
    percentages: np.ndarray
    crime_filter: Optional[CrimeType] = None

    def modes(self) -> list[int]:
        """Indices of strict local maxima among occupied bins.

        A plateau reports its first bin.
        """
        c = self.counts
        out = []
        for i in range(len(c)):
            if c[i] == 0:
                continue
            left = c[i - 1] if i > 0 else -1
            right = c[i + 1] if i < len(c) - 1 else -1
            if c[i] > left and c[i] >= right:
                if i > 0 and c[i] == c[i - 1]:
                    continue  # plateau continuation
                out.append(i)
        return out


def _filtered(incidents: Sequence[CrimeIncident], crime_filter: Optional[CrimeType]):
    kept = [i for i in incidents if crime_filter is None or i.crime_type == crime_filter]
    if not kept:
        raise EmptyAfterFilter(f"no incidents left after filtering on {crime_filter}")
    return kept


def _histogram(labels, counts, crime_filter) -> Histogram:
    counts = np.asarray(counts, dtype=int)
    total = counts.sum()
    pct = 100.0 * counts / total if total > 0 else np.zeros(len(counts))
    return Histogram(labels=tuple(labels), counts=counts, percentages=pct,
                     crime_filter=crime_filter)


def hour_histogram(
    incidents: Sequence[CrimeIncident], crime_filter: Optional[CrimeType] = None
) -> Histogram:
    """Crime percentage by hour of day, 24 bins."""
    kept = _filtered(incidents, crime_filter)
    counts = np.zeros(24, dtype=int)
    for inc in kept:
        counts[inc.occurred_at.hour] += 1
    return _histogram([f"{h:02d}" for h in range(24)], counts, crime_filter)


def month_histogram(
    incidents: Sequence[CrimeIncident], crime_filter: Optional[CrimeType] = None
) -> Histogram:
    """Crime percentage by calendar month, 12 bins."""
    kept = _filtered(incidents, crime_filter)
    counts = np.zeros(12, dtype=int)
    for inc in kept:
        counts[inc.occurred_at.month - 1] += 1
    return _histogram([calendar.month_abbr[m] for m in range(1, 13)], counts, crime_filter)


DEFAULT_TEMP_BIN_WIDTH_F = 5.0


def temperature_histogram(
    incidents: Sequence[CrimeIncident],
    weather: Sequence[WeatherDay],
    crime_filter: Optional[CrimeType] = None,
    bin_width_f: float = DEFAULT_TEMP_BIN_WIDTH_F,
) -> Histogram:
    """Crime percentage by the day's average temperature, fixed-width bins."""
    kept = _filtered(incidents, crime_filter)
    temps_by_date, _ = weather_by_date(weather, {i.occurred_at.date() for i in kept})
    temps = np.array([temps_by_date[i.occurred_at.date()] for i in kept])
    lo = np.floor(temps.min() / bin_width_f) * bin_width_f
    hi = np.floor(temps.max() / bin_width_f) * bin_width_f + bin_width_f
    edges = np.arange(lo, hi + bin_width_f / 2, bin_width_f)
    counts, _ = np.histogram(temps, bins=edges)
    labels = [f"[{edges[i]:g},{edges[i+1]:g})" for i in range(len(edges) - 1)]
    return _histogram(labels, counts, crime_filter)


def month_temperature_profile(
    incidents: Sequence[CrimeIncident], weather: Sequence[WeatherDay]
) -> list[tuple[int, float, float]]:
    """(month, crime percentage, mean temperature over that month's incidents)."""
    if not incidents:
        raise EmptyAfterFilter("no incidents")
    temps_by_date, _ = weather_by_date(weather, {i.occurred_at.date() for i in incidents})
    total = len(incidents)
    out = []
    for m in range(1, 13):
        members = [i for i in incidents if i.occurred_at.month == m]
        if not members:
            continue
        mean_temp = float(np.mean([temps_by_date[i.occurred_at.date()] for i in members]))
        out.append((m, 100.0 * len(members) / total, mean_temp))
    return out


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length vectors of length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(dx @ dx))
    sy = float(np.sqrt(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ConstantInput("correlation undefined for a constant vector")
    return float((dx @ dy) / (sx * sy))


POLICE_SHIFT_CHANGE_HOURS = (7, 15, 23)


def shift_change_correlation(hour_hist: Histogram) -> float:
    """Correlation of hourly crime percentages with police shift-change hours."""
    if len(hour_hist.counts) != 24:
        raise ValueError("expected a 24-bin hour histogram")
    indicator = np.array([1.0 if h in POLICE_SHIFT_CHANGE_HOURS else 0.0 for h in range(24)])
    return pearson(hour_hist.percentages, indicator)


def feature_response_correlation(
    rows: Sequence[ModelRow],
    feature: str,
    names: Sequence[str],
    crime_type: CrimeType,
) -> tuple[float, list[tuple[float, float]]]:
    """Correlation between a named feature and one crime type's response share.

    Also returns the (feature, response) pairs for external plotting.
    """
    j = list(names).index(feature)
    pairs = [(float(r.features[j]), r.responses[crime_type]) for r in rows]
    if len(pairs) < 2:
        raise ValueError("need at least two rows")
    r = pearson([p[0] for p in pairs], [p[1] for p in pairs])
    return r, pairs
