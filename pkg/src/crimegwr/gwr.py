"""Geographically weighted regression: kernel weights, local weighted
least squares, bandwidth selection, prediction and goodness of fit.

Every location gets its own coefficient vector, estimated by weighted
least squares where the weight of each observation decays with its
great-circle distance from the regression point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve

from .geo import GeoPoint, pairwise_distance_km, point_to_rows_km

# Rows with kernel weight at or below this floor do not count toward the
# "enough local data" check.
WEIGHT_FLOOR = 1e-12

# Condition estimate above this triggers the ridge fallback.
CONDITION_LIMIT = 1e12

RIDGE_SCALE = 1e-8

SCHEMA_VERSION = "1"


class DegenerateFit(Exception):
    """Fewer than p rows carry non-negligible weight at a regression point."""

    def __init__(self, message: str, point: Optional[GeoPoint] = None):
        super().__init__(message)
        self.point = point


class AllCandidatesDegenerate(Exception):
    """Every candidate bandwidth produced a degenerate local fit."""


class EmptyGeoID(Exception):
    """geoid_average prediction requested for a GeoID with no training fits."""


class ZeroVariance(Exception):
    """R-squared is undefined when all actual values are identical."""


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian distance-decay weighting with a fixed bandwidth in km."""

    bandwidth_km: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.bandwidth_km <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth_km}")
        if self.kind != "gaussian":
            raise ValueError(f"unsupported kernel kind: {self.kind!r}")


def kernel_weight(d_km, spec: KernelSpec):
    """Weight exp(-(d/h)^2); 1 at zero distance, strictly positive everywhere.

    Accepts a scalar or array of distances in kilometers.
    """
    d = np.asarray(d_km, dtype=float)
    w = np.exp(-((d / spec.bandwidth_km) ** 2))
    return float(w) if np.isscalar(d_km) else w


@dataclass(frozen=True)
class GWRDataset:
    """Rows of (location, feature vector, response).

    Feature column 0 is the intercept and must be 1 in every row. ``geoids``
    optionally names the geographic unit each row belongs to; rows sharing a
    geoid share coordinates.
    """

    lons: np.ndarray
    lats: np.ndarray
    X: np.ndarray
    y: np.ndarray
    geoids: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "lons", np.asarray(self.lons, dtype=float))
        object.__setattr__(self, "lats", np.asarray(self.lats, dtype=float))
        object.__setattr__(self, "X", np.asarray(self.X, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        n, p = self.X.shape
        if p < 1:
            raise ValueError("need at least the intercept feature")
        if n < p:
            raise ValueError(f"n={n} rows cannot identify p={p} coefficients")
        if not (len(self.lons) == len(self.lats) == len(self.y) == n):
            raise ValueError("row count mismatch between locations, X and y")
        if not np.all(self.X[:, 0] == 1.0):
            raise ValueError("feature 0 must be the constant intercept column")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("features and responses must be finite")
        if np.any(np.abs(self.lons) > 180) or np.any(np.abs(self.lats) > 90):
            raise ValueError("coordinates out of range")
        if self.geoids is not None and len(self.geoids) != n:
            raise ValueError("geoids length mismatch")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def row_geoid(self, i: int) -> str:
        return self.geoids[i] if self.geoids is not None else f"L{i:04d}"


@dataclass(frozen=True)
class LocalFit:
    """Coefficient vector estimated at one regression point."""

    geoid: str
    point: GeoPoint
    beta: np.ndarray
    effective_weight_sum: float
    ridge_applied: bool


@dataclass(frozen=True)
class FitDiagnostics:
    global_r_squared: float
    residuals: np.ndarray
    residual_variance: float


@dataclass(frozen=True)
class FittedGWR:
    """One LocalFit per training regression point, plus fit diagnostics."""

    kernel: KernelSpec
    feature_names: tuple[str, ...]
    local_fits: tuple[LocalFit, ...]
    diagnostics: FitDiagnostics

    def by_geoid(self) -> dict[str, list[LocalFit]]:
        out: dict[str, list[LocalFit]] = {}
        for lf in self.local_fits:
            out.setdefault(lf.geoid, []).append(lf)
        return out

    def to_json_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "kernel": {"kind": self.kernel.kind, "bandwidth_km": self.kernel.bandwidth_km},
            "feature_names": list(self.feature_names),
            "locals": [
                {
                    "geoid": lf.geoid,
                    "lon": lf.point.lon,
                    "lat": lf.point.lat,
                    "beta": [float(b) for b in lf.beta],
                    "ridge_applied": lf.ridge_applied,
                }
                for lf in self.local_fits
            ],
            "diagnostics": {
                "global_r_squared": self.diagnostics.global_r_squared,
                "residuals": [float(r) for r in self.diagnostics.residuals],
                "residual_variance": self.diagnostics.residual_variance,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FittedGWR":
        if doc.get("version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema version: {doc.get('version')!r}")
        kernel = KernelSpec(bandwidth_km=doc["kernel"]["bandwidth_km"], kind=doc["kernel"]["kind"])
        locals_ = tuple(
            LocalFit(
                geoid=d["geoid"],
                point=GeoPoint(lon=d["lon"], lat=d["lat"]),
                beta=np.asarray(d["beta"], dtype=float),
                effective_weight_sum=float("nan"),
                ridge_applied=d["ridge_applied"],
            )
            for d in doc["locals"]
        )
        diag = FitDiagnostics(
            global_r_squared=doc["diagnostics"]["global_r_squared"],
            residuals=np.asarray(doc["diagnostics"]["residuals"], dtype=float),
            residual_variance=doc["diagnostics"]["residual_variance"],
        )
        return cls(
            kernel=kernel,
            feature_names=tuple(doc["feature_names"]),
            local_fits=locals_,
            diagnostics=diag,
        )

    @classmethod
    def from_json(cls, text: str) -> "FittedGWR":
        return cls.from_json_dict(json.loads(text))


def _solve_weighted(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, bool]:
    """Solve the weighted normal equations (X'WX) beta = X'Wy.

    Uses a Cholesky factorization of the weighted Gram matrix; condition is
    estimated from the ratio of extreme diagonal pivots. A near-singular Gram
    gets a small ridge term and the fallback is reported to the caller.
    """
    sw = np.sqrt(w)
    A = X * sw[:, None]
    gram = A.T @ A
    rhs = A.T @ (y * sw)
    p = gram.shape[0]
    ridge_applied = False
    try:
        L = np.linalg.cholesky(gram)
        piv = np.diag(L)
        if (piv.max() / piv.min()) ** 2 > CONDITION_LIMIT:
            raise np.linalg.LinAlgError("ill-conditioned")
    except np.linalg.LinAlgError:
        lam = RIDGE_SCALE * np.trace(gram) / p
        L = np.linalg.cholesky(gram + lam * np.eye(p))
        ridge_applied = True
    beta = cho_solve((L, True), rhs)
    return beta, ridge_applied


def _local_beta(
    data: GWRDataset, w: np.ndarray, point: GeoPoint
) -> tuple[np.ndarray, float, bool]:
    if int(np.count_nonzero(w > WEIGHT_FLOOR)) < data.p:
        raise DegenerateFit(
            f"only {np.count_nonzero(w > WEIGHT_FLOOR)} rows carry weight > {WEIGHT_FLOOR} "
            f"at ({point.lon:.5f}, {point.lat:.5f}); bandwidth too small for local density",
            point=point,
        )
    beta, ridge_applied = _solve_weighted(data.X, data.y, w)
    return beta, float(w.sum()), ridge_applied


def fit_local(
    point: GeoPoint,
    data: GWRDataset,
    kernel: KernelSpec,
    exclude_index: Optional[int] = None,
    geoid: str = "",
) -> LocalFit:
    """Estimate the coefficient vector at one regression point.

    Minimizes the kernel-weighted sum of squared residuals over all rows
    (minus ``exclude_index``, used by leave-one-out CV) via the closed-form
    normal equations.
    """
    d = point_to_rows_km(point, data.lons, data.lats)
    w = kernel_weight(d, kernel)
    if exclude_index is not None:
        w = w.copy()
        w[exclude_index] = 0.0
    beta, wsum, ridge_applied = _local_beta(data, w, point)
    return LocalFit(
        geoid=geoid,
        point=point,
        beta=beta,
        effective_weight_sum=wsum,
        ridge_applied=ridge_applied,
    )


def _distinct_locations(data: GWRDataset) -> list[tuple[int, GeoPoint, np.ndarray]]:
    """Group row indices by exact coordinates, first-seen order.

    Returns (first_row_index, point, row_indices) per distinct location.
    """
    groups: dict[tuple[float, float], list[int]] = {}
    for i in range(data.n):
        groups.setdefault((float(data.lons[i]), float(data.lats[i])), []).append(i)
    out = []
    for (lon, lat), idx in groups.items():
        out.append((idx[0], GeoPoint(lon=lon, lat=lat), np.asarray(idx)))
    return out


def fit(data: GWRDataset, kernel: KernelSpec, feature_names: Optional[Sequence[str]] = None) -> FittedGWR:
    """Fit one local regression per distinct training location.

    Rows sharing coordinates share a single regression point. Diagnostics
    predict each row with its own location's coefficients.
    """
    if feature_names is None:
        feature_names = ["intercept"] + [f"x{k}" for k in range(1, data.p)]
    if len(feature_names) != data.p:
        raise ValueError("feature_names length must equal p")

    local_fits = []
    fitted = np.empty(data.n)
    for first_idx, point, rows in _distinct_locations(data):
        lf = fit_local(point, data, kernel, geoid=data.row_geoid(first_idx))
        local_fits.append(lf)
        fitted[rows] = data.X[rows] @ lf.beta

    residuals = data.y - fitted
    ss_res = float(residuals @ residuals)
    try:
        r2 = r_squared(data.y, fitted)
    except ZeroVariance:
        r2 = float("nan")
    sigma2 = ss_res / max(data.n - data.p, 1)
    return FittedGWR(
        kernel=kernel,
        feature_names=tuple(feature_names),
        local_fits=tuple(local_fits),
        diagnostics=FitDiagnostics(
            global_r_squared=r2, residuals=residuals, residual_variance=sigma2
        ),
    )


def loo_cv_score(data: GWRDataset, kernel: KernelSpec, distances: Optional[np.ndarray] = None) -> float:
    """Sum of squared leave-one-out prediction errors for one bandwidth.

    ``distances`` may carry the precomputed n-by-n haversine matrix.
    Raises DegenerateFit if any row's local fit degenerates.
    """
    if distances is None:
        distances = pairwise_distance_km(data.lons, data.lats, data.lons, data.lats)
    score = 0.0
    for i in range(data.n):
        w = kernel_weight(distances[i], kernel)
        w[i] = 0.0
        point = GeoPoint(lon=float(data.lons[i]), lat=float(data.lats[i]))
        beta, _, _ = _local_beta(data, w, point)
        err = data.y[i] - data.X[i] @ beta
        score += float(err * err)
    return score


def select_bandwidth(
    data: GWRDataset, candidate_hs: Sequence[float], kind: str = "gaussian"
) -> tuple[float, dict[float, float]]:
    """Pick the bandwidth minimizing the leave-one-out CV score.

    Candidates whose local fits degenerate on some row score infinity.
    Ties break toward the larger bandwidth (smoother model).
    """
    if len(candidate_hs) == 0:
        raise ValueError("candidate grid is empty")
    if any(h <= 0 for h in candidate_hs):
        raise ValueError("all candidate bandwidths must be positive")
    distances = pairwise_distance_km(data.lons, data.lats, data.lons, data.lats)
    scores: dict[float, float] = {}
    for h in candidate_hs:
        try:
            scores[float(h)] = loo_cv_score(data, KernelSpec(bandwidth_km=h, kind=kind), distances)
        except DegenerateFit:
            scores[float(h)] = float("inf")
    best_score = min(scores.values())
    if not np.isfinite(best_score):
        raise AllCandidatesDegenerate(
            f"all {len(candidate_hs)} candidate bandwidths degenerate on some row"
        )
    best_h = max(h for h, s in scores.items() if s == best_score)
    return best_h, scores


def default_bandwidth_grid(data: GWRDataset, num: int = 16) -> np.ndarray:
    """Log-spaced grid spanning [0.1 x median pairwise distance, 10 x max]."""
    d = pairwise_distance_km(data.lons, data.lats, data.lons, data.lats)
    upper = d[np.triu_indices(data.n, k=1)]
    positive = upper[upper > 0]
    if positive.size == 0:
        raise ValueError("all rows share one location; bandwidth grid is undefined")
    lo = 0.1 * float(np.median(positive))
    hi = 10.0 * float(positive.max())
    return np.logspace(np.log10(lo), np.log10(hi), num)


def predict(
    model: FittedGWR,
    data: GWRDataset,
    point: GeoPoint,
    features: np.ndarray,
    mode: str = "geoid_average",
    geoid: Optional[str] = None,
) -> float:
    """Predict the response at a point.

    ``refit_at_point`` runs a fresh local fit at the query point against the
    training data. ``geoid_average`` averages the coefficient vectors of the
    named GeoID's training fits componentwise.
    """
    features = np.asarray(features, dtype=float)
    if features.shape != (len(model.feature_names),):
        raise ValueError(
            f"features must have length {len(model.feature_names)}, got {features.shape}"
        )
    if mode == "refit_at_point":
        lf = fit_local(point, data, model.kernel)
        return float(features @ lf.beta)
    if mode == "geoid_average":
        if geoid is None:
            raise ValueError("geoid_average mode requires a geoid")
        fits = model.by_geoid().get(geoid, [])
        if not fits:
            raise EmptyGeoID(f"no training fits for geoid {geoid!r}")
        beta_bar = np.mean([lf.beta for lf in fits], axis=0)
        return float(features @ beta_bar)
    raise ValueError(f"unknown prediction mode: {mode!r}")


def r_squared(actual: np.ndarray, predicted: np.ndarray) -> float:
    """1 - SS_res/SS_tot, with SS_tot about the mean of ``actual``."""
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if actual.shape != predicted.shape or actual.ndim != 1 or actual.size == 0:
        raise ValueError("actual and predicted must be equal-length nonempty vectors")
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVariance("all actual values identical; R^2 undefined")
    ss_res = float(np.sum((actual - predicted) ** 2))
    return 1.0 - ss_res / ss_tot
