"""Shared fixture builders for the test suite."""

import numpy as np

from crimegwr.gwr import GWRDataset

# A modest Rochester-sized box; small enough that a 1e6 km bandwidth makes
# every kernel weight indistinguishable from 1.
LON0, LAT0 = -77.7, 43.1


def regional_dataset(rng, n, p, span_deg=0.2, noise=1.0, geoids=None):
    """Random rows scattered over a small box with standard-normal features."""
    lons = rng.uniform(LON0, LON0 + span_deg, n)
    lats = rng.uniform(LAT0, LAT0 + span_deg, n)
    X = rng.standard_normal((n, p))
    X[:, 0] = 1.0
    beta = rng.standard_normal(p)
    y = X @ beta + noise * rng.standard_normal(n)
    return GWRDataset(lons=lons, lats=lats, X=X, y=y, geoids=geoids)
