import json

import numpy as np
import pytest
from scipy import stats

from romp.probes import (
    h_deviation_bound,
    probe_bruteforce_failure,
    probe_concentration,
    probe_h_deviation,
    probe_max_subgaussian,
)


class TestMaxSubgaussian:
    def test_zero_sigma(self):
        r = probe_max_subgaussian(10, 10.0, 0.0, 100, seed=0)
        assert r.violation_rate == 0.0
        assert r.statistics["max_abs_mean"] == 0.0

    def test_single_variable_tail_oracle(self):
        # P(|Z| > 4 sqrt(log 10)) ~ 1.3e-9 for one standard Gaussian
        threshold = 4.0 * np.sqrt(np.log(10.0))
        exact = 2.0 * stats.norm.sf(threshold)
        assert exact < 1e-8
        r = probe_max_subgaussian(1, 10.0, 1.0, 10_000, seed=1)
        assert r.violation_rate <= 0.03

    def test_concentration_near_extreme_value_scale(self):
        r = probe_max_subgaussian(1000, 100.0, 1.0, 2_000, seed=2)
        # maxima sit near sqrt(2 log m) ~ 3.72, far below the envelope 13.57
        assert abs(r.statistics["max_abs_mean"] - np.sqrt(2 * np.log(1000))) < 0.35
        assert r.bounds["threshold"] > 13.0
        assert r.violation_rate == 0.0

    def test_violation_rate_within_bound(self):
        r = probe_max_subgaussian(1000, 100.0, 1.0, 10_000, seed=3)
        se = r.statistics["rate_std_error"]
        assert r.violation_rate <= r.bounds["probability_bound"] + 3 * se

    def test_report_json_roundtrip(self):
        r = probe_max_subgaussian(5, 10.0, 1.0, 50, seed=4)
        doc = json.loads(r.to_json())
        assert doc["name"] == "max_subgaussian" and doc["trials"] == 50


class TestConcentration:
    def test_chi_square_median_oracle_n1(self):
        # n=1, log p = 1: the ratio statistic is |Y^2 - 1| for Y standard
        # normal; its median solves F(1+t) - F(1-t) = 1/2 for chi^2_1
        r = probe_concentration(1, float(np.e), 200_000, seed=5)
        from scipy.optimize import brentq

        med = brentq(
            lambda t: stats.chi2.cdf(1 + t, df=1) - stats.chi2.cdf(1 - t, df=1) - 0.5,
            1e-9,
            10.0,
        )
        assert abs(r.statistics["ratio_sq_median"] - med) < 0.02

    def test_sum_of_squares_unbiased(self):
        r = probe_concentration(400, 50.0, 20_000, seed=6)
        assert abs(r.statistics["sum_sq_mean"] - 1.0) <= 3 * r.statistics["sum_sq_se"]

    def test_cross_term_zero_mean(self):
        r = probe_concentration(400, 50.0, 20_000, seed=7)
        assert abs(r.statistics["cross_mean"]) <= 3 * r.statistics["cross_se"]

    def test_fitted_constants_bounded_and_stable(self):
        values = {}
        for n in (100, 400, 1600):
            r = probe_concentration(n, 50.0, 30_000, seed=8)
            c1, c2 = r.fitted_constants["c1"], r.fitted_constants["c2"]
            assert c1 <= 10.0 and c2 <= 10.0
            lo1, hi1 = r.fitted_constants["c1_ci"]
            assert lo1 <= c1 <= hi1
            values[n] = (c1, c2)
        c1s = [v[0] for v in values.values()]
        c2s = [v[1] for v in values.values()]
        assert max(c1s) / min(c1s) <= 1.2
        assert max(c2s) / min(c2s) <= 1.2

    def test_determinism(self):
        a = probe_concentration(100, 50.0, 5_000, seed=9)
        b = probe_concentration(100, 50.0, 5_000, seed=9)
        assert a.to_json() == b.to_json()


class TestHDeviation:
    def test_noiseless_zero_signal_gives_zero_scores(self):
        # with beta* = 0 impossible (signals are nonzero); instead check the
        # n1=0, sigma=0 case: deviations are the pure cross-column noise
        r = probe_h_deviation(50, 40, 2, 0.0, [0], trials=3, seed=10)
        assert r.fitted_constants["envelope_constant"] < 20.0
        assert all(v >= 0 for v in r.statistics["mean_deviation"])

    def test_scaling_with_n(self):
        # n1 = 0 deviation scales like sqrt(log p / n): quadrupling n should
        # halve it (ratio in [1.6, 2.4])
        r400 = probe_h_deviation(200, 400, 3, 0.5, [0], trials=12, seed=11)
        r1600 = probe_h_deviation(200, 1600, 3, 0.5, [0], trials=12, seed=11)
        ratio = r400.statistics["mean_deviation"][0] / r1600.statistics["mean_deviation"][0]
        assert 1.6 <= ratio <= 2.4

    def test_slope_positive_at_reference_scale(self):
        r = probe_h_deviation(500, 300, 5, 0.5, [0, 2, 4, 6, 8], trials=6, seed=12)
        assert r.fitted_constants["slope"] > 0.0
        assert r.fitted_constants["envelope_constant"] <= 20.0

    def test_bound_formula(self):
        beta = np.zeros(100)
        beta[:4] = 1.0
        b0 = h_deviation_bound(100, 400, beta, 0.5, 0)
        b5 = h_deviation_bound(100, 400, beta, 0.5, 5)
        log_p = np.log(100)
        expected0 = np.sqrt(2 * log_p / 400) + np.sqrt((4 + 0.25) * log_p / 400)
        assert abs(b0 - expected0) < 1e-12
        assert b5 - b0 == pytest.approx(5 * (log_p / 400) * np.sqrt(4.25))

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            probe_h_deviation(50, 40, 2, 0.5, [], trials=2, seed=0)


class TestBruteforceFailure:
    def test_precondition_refused(self):
        with pytest.raises(ValueError):
            probe_bruteforce_failure(100, 4, 2000, 0, trials=5, seed=0)

    def test_small_run_holds(self):
        r = probe_bruteforce_failure(100, 4, 2000, 1200, trials=20, seed=13)
        assert 1.0 - r.violation_rate >= 0.9

    def test_alternative_objective_matches_variance_accounting(self):
        r = probe_bruteforce_failure(100, 4, 2000, 1200, trials=50, seed=14)
        predicted = r.bounds["alternative_predicted"]
        assert abs(r.statistics["alternative_mean"] - predicted) <= 0.1 * predicted

    def test_violation_rate_in_unit_interval(self):
        r = probe_bruteforce_failure(100, 4, 2000, 1200, trials=10, seed=15)
        assert 0.0 <= r.violation_rate <= 1.0

    def test_determinism(self):
        a = probe_bruteforce_failure(50, 4, 200, 120, trials=10, seed=16)
        b = probe_bruteforce_failure(50, 4, 200, 120, trials=10, seed=16)
        assert a.to_json() == b.to_json()
