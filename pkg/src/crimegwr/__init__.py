"""Spatially varying crime-risk regression: data ingestion, descriptive
statistics, a geographically weighted regression engine, an evaluation
harness and an HTTP risk-query service."""

from .geo import EARTH_RADIUS_KM, GeoPoint, distance_km
from .gwr import (
    AllCandidatesDegenerate,
    DegenerateFit,
    EmptyGeoID,
    FitDiagnostics,
    FittedGWR,
    GWRDataset,
    KernelSpec,
    LocalFit,
    ZeroVariance,
    default_bandwidth_grid,
    fit,
    fit_local,
    kernel_weight,
    predict,
    r_squared,
    select_bandwidth,
)

__all__ = [
    "EARTH_RADIUS_KM",
    "GeoPoint",
    "distance_km",
    "AllCandidatesDegenerate",
    "DegenerateFit",
    "EmptyGeoID",
    "FitDiagnostics",
    "FittedGWR",
    "GWRDataset",
    "KernelSpec",
    "LocalFit",
    "ZeroVariance",
    "default_bandwidth_grid",
    "fit",
    "fit_local",
    "kernel_weight",
    "predict",
    "r_squared",
    "select_bandwidth",
]
