"""Great-circle geometry on the WGS-84 mean-radius sphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_KM = 6371.0088


@dataclass(frozen=True)
class GeoPoint:
    """A longitude/latitude pair in decimal degrees."""

    lon: float
    lat: float

    def __post_init__(self):
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")


def distance_km(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine great-circle distance between two points, in kilometers."""
    return float(pairwise_distance_km(
        np.array([a.lon]), np.array([a.lat]), np.array([b.lon]), np.array([b.lat])
    )[0, 0])


def point_to_rows_km(point: GeoPoint, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
    """Distances from one point to each (lon, lat) row, in kilometers."""
    return pairwise_distance_km(
        np.array([point.lon]), np.array([point.lat]), np.asarray(lons), np.asarray(lats)
    )[0]


def pairwise_distance_km(
    lons_a: np.ndarray, lats_a: np.ndarray, lons_b: np.ndarray, lats_b: np.ndarray
) -> np.ndarray:
    """Haversine distance matrix, shape (len(a), len(b)), in kilometers."""
    lon1 = np.radians(np.asarray(lons_a, dtype=float))[:, None]
    lat1 = np.radians(np.asarray(lats_a, dtype=float))[:, None]
    lon2 = np.radians(np.asarray(lons_b, dtype=float))[None, :]
    lat2 = np.radians(np.asarray(lats_b, dtype=float))[None, :]
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    # clip guards against rounding pushing h a hair past 1 for antipodes
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
