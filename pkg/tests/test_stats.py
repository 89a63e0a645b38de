import io
from datetime import datetime

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crimegwr.geo import GeoPoint
from crimegwr.ingest import CrimeIncident, CrimeType, parse_weather
from crimegwr.stats import (
    ConstantInput,
    EmptyAfterFilter,
    Histogram,
    feature_response_correlation,
    hour_histogram,
    month_histogram,
    month_temperature_profile,
    pearson,
    shift_change_correlation,
    temperature_histogram,
)

from oracles import pearson_oracle

WEATHER_HEADER = "date,avg_temp_f,snowfall_in\n"


def incident(when, ctype=CrimeType.LARCENY, geoid="G1"):
    return CrimeIncident(occurred_at=when, geoid=geoid,
                         location=GeoPoint(lon=-77.6, lat=43.15), crime_type=ctype)


class TestHourHistogram:
    def test_single_hour_mass(self):
        incs = [incident(datetime(2015, 1, 1, 12, m)) for m in range(5)]
        h = hour_histogram(incs)
        assert h.percentages[12] == 100.0
        assert h.counts.sum() == 5

    def test_direct_counts(self):
        incs = [incident(datetime(2015, 1, 1, 0, 0)),
                incident(datetime(2015, 1, 2, 0, 30)),
                incident(datetime(2015, 1, 3, 12, 0))]
        h = hour_histogram(incs)
        assert h.percentages[0] == pytest.approx(200 / 3)
        assert h.percentages[12] == pytest.approx(100 / 3)

    def test_filter_and_empty(self):
        incs = [incident(datetime(2015, 1, 1, 3), CrimeType.BURGLARY)]
        h = hour_histogram(incs, CrimeType.BURGLARY)
        assert h.crime_filter is CrimeType.BURGLARY
        with pytest.raises(EmptyAfterFilter):
            hour_histogram(incs, CrimeType.MURDER)

    def test_order_invariance(self):
        rng = np.random.default_rng(1)
        incs = [incident(datetime(2015, 1, 1, int(h))) for h in rng.integers(0, 24, 50)]
        a = hour_histogram(incs)
        b = hour_histogram(list(reversed(incs)))
        assert np.array_equal(a.counts, b.counts)

    def test_percentages_sum_to_100(self):
        rng = np.random.default_rng(2)
        incs = [incident(datetime(2015, 1, 1, int(h))) for h in rng.integers(0, 24, 37)]
        h = hour_histogram(incs)
        assert h.percentages.sum() == pytest.approx(100.0, abs=1e-6)


class TestMonthHistogram:
    def test_single_month(self):
        incs = [incident(datetime(2015, 6, d, 10)) for d in range(1, 6)]
        h = month_histogram(incs)
        assert h.percentages[5] == 100.0

    def test_uniform_months(self):
        incs = [incident(datetime(2015, m, 1, 10)) for m in range(1, 13)]
        h = month_histogram(incs)
        assert np.allclose(h.percentages, 100.0 / 12)


class TestTemperatureHistogram:
    def _weather(self, pairs):
        text = WEATHER_HEADER + "".join(f"{d},{t},0\n" for d, t in pairs)
        days, _ = parse_weather(io.StringIO(text))
        return days

    def test_single_occupied_bin(self):
        days = self._weather([("2015-07-01", 70)])
        incs = [incident(datetime(2015, 7, 1, 10)) for _ in range(4)]
        h = temperature_histogram(incs, days)
        occupied = np.flatnonzero(h.counts)
        assert len(occupied) == 1
        assert "70" in h.labels[occupied[0]]

    def test_bimodal_injection_has_two_occupied_bins_and_modes(self):
        days = self._weather([("2015-01-15", 32), ("2015-07-15", 70)])
        incs = ([incident(datetime(2015, 1, 15, 10)) for _ in range(6)]
                + [incident(datetime(2015, 7, 15, 10)) for _ in range(6)])
        h = temperature_histogram(incs, days)
        occupied = list(np.flatnonzero(h.counts))
        assert len(occupied) == 2
        assert h.modes() == occupied  # both isolated peaks are local maxima

    def test_configurable_bin_width(self):
        days = self._weather([("2015-01-15", 30), ("2015-01-16", 39)])
        incs = [incident(datetime(2015, 1, 15, 10)), incident(datetime(2015, 1, 16, 10))]
        wide = temperature_histogram(incs, days, bin_width_f=10)
        assert len(wide.labels) == 1 and wide.counts[0] == 2


class TestMonthTemperatureProfile:
    def test_hand_averaged_fixture(self):
        days_text = WEATHER_HEADER + "2015-06-01,60,0\n2015-06-02,70,0\n2015-07-01,80,0\n"
        days, _ = parse_weather(io.StringIO(days_text))
        incs = [incident(datetime(2015, 6, 1, 10)),
                incident(datetime(2015, 6, 2, 10)),
                incident(datetime(2015, 6, 2, 11)),
                incident(datetime(2015, 7, 1, 10))]
        profile = month_temperature_profile(incs, days)
        assert profile == [
            (6, pytest.approx(75.0), pytest.approx((60 + 70 + 70) / 3)),
            (7, pytest.approx(25.0), pytest.approx(80.0)),
        ]


class TestPearson:
    def test_perfect_linear(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert pearson(x, [3 * v + 1 for v in x]) == pytest.approx(1.0)

    def test_perfect_negative(self):
        x = [1.0, 2.0, 3.0]
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)

    def test_matches_covariance_oracle_on_random_pairs(self):
        rng = np.random.default_rng(3)
        x = list(rng.standard_normal(50))
        y = list(rng.standard_normal(50))
        assert pearson(x, y) == pytest.approx(pearson_oracle(x, y), abs=1e-12)

    def test_constant_input_raises(self):
        with pytest.raises(ConstantInput):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50)
    def test_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(12)
        y = rng.standard_normal(12)
        assert pearson(x, y) == pytest.approx(pearson(y, x), abs=1e-12)

    @given(st.integers(min_value=0, max_value=10_000),
           st.floats(min_value=-5, max_value=5).filter(lambda a: abs(a) > 1e-3),
           st.floats(min_value=-5, max_value=5))
    @settings(max_examples=50)
    def test_affine_invariance_up_to_sign(self, seed, a, b):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(12)
        y = rng.standard_normal(12)
        expected = float(np.sign(a)) * pearson(x, y)
        assert pearson(a * x + b, y) == pytest.approx(expected, abs=1e-12)


class TestShiftChangeCorrelation:
    def _hist_from_hours(self, hours):
        incs = [incident(datetime(2015, 1, 1, h)) for h in hours]
        return hour_histogram(incs)

    def test_uniform_crime_is_degenerate(self):
        h = self._hist_from_hours(list(range(24)))
        with pytest.raises(ConstantInput):
            shift_change_correlation(h)

    def test_mass_only_at_shift_hours_is_one(self):
        h = self._hist_from_hours([7, 15, 23] * 4)
        assert shift_change_correlation(h) == pytest.approx(1.0)

    def test_mass_at_noon_matches_oracle(self):
        h = self._hist_from_hours([12] * 10)
        indicator = [1.0 if k in (7, 15, 23) else 0.0 for k in range(24)]
        expected = pearson_oracle(list(h.percentages), indicator)
        assert shift_change_correlation(h) == pytest.approx(expected, abs=1e-12)

    def test_definitional_equivalence_with_pearson(self):
        rng = np.random.default_rng(4)
        hours = list(rng.integers(0, 24, 200))
        h = self._hist_from_hours(hours)
        indicator = np.array([1.0 if k in (7, 15, 23) else 0.0 for k in range(24)])
        assert shift_change_correlation(h) == pearson(h.percentages, indicator)

    def test_wrong_bin_count_rejected(self):
        bad = Histogram(labels=("a",), counts=np.array([1]),
                        percentages=np.array([100.0]))
        with pytest.raises(ValueError):
            shift_change_correlation(bad)


class TestFeatureResponseCorrelation:
    def _rows(self, prop_rates, burglary_shares):
        from crimegwr.ingest import ModelRow

        rows = []
        for i, (pr, bs) in enumerate(zip(prop_rates, burglary_shares)):
            features = np.array([1.0, 100.0, pr, 0.2, 0.1, 35.0, 0, 0, 0, 50.0])
            responses = {t: 0.0 for t in CrimeType}
            responses[CrimeType.BURGLARY] = bs
            responses[CrimeType.LARCENY] = 1.0 - bs
            rows.append(ModelRow(geoid=f"G{i}", location=GeoPoint(lon=-77.6, lat=43.1),
                                 year=2015, time_bucket=0, features=features,
                                 responses=responses, support=10))
        return rows

    NAMES = ["intercept", "population_density", "property_rate", "eth_share_1",
             "eth_share_2", "median_age", "is_morning", "is_afternoon",
             "is_evening", "avg_temp_f"]

    def test_linear_decrease_gives_minus_one(self):
        prop = [1.0, 2.0, 3.0, 4.0]
        burg = [0.8, 0.6, 0.4, 0.2]
        r, pairs = feature_response_correlation(self._rows(prop, burg),
                                                "property_rate", self.NAMES,
                                                CrimeType.BURGLARY)
        assert r == pytest.approx(-1.0)
        assert pairs == [(p, b) for p, b in zip(prop, burg)]

    def test_shuffled_pairing_matches_oracle(self):
        rng = np.random.default_rng(5)
        prop = list(rng.uniform(1, 5, 30))
        burg = list(rng.uniform(0, 1, 30))
        r, _ = feature_response_correlation(self._rows(prop, burg),
                                            "property_rate", self.NAMES,
                                            CrimeType.BURGLARY)
        assert r == pytest.approx(pearson_oracle(prop, burg), abs=1e-12)

    def test_single_row_rejected(self):
        with pytest.raises(ValueError):
            feature_response_correlation(self._rows([1.0], [0.5]),
                                         "property_rate", self.NAMES,
                                         CrimeType.BURGLARY)
