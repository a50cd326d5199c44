"""Distribution fits and normality tests, cross-validated against scipy
reference implementations and parameter-recovery checks on synthetic
samples with known generating distributions."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.stats as st

from techrates.distfit import (
    ANDERSON_SIGNIFICANCE,
    FAMILIES,
    FitError,
    anderson_darling_normal,
    dagostino_k2,
    fit_all,
    fit_distribution,
    ks_normal,
    normality_tests,
)


@pytest.fixture(scope="module")
def gaussian_sample():
    return np.random.default_rng(101).normal(3.0, 2.0, size=300)


@pytest.fixture(scope="module")
def skewed_sample():
    return np.random.default_rng(102).exponential(1.0, size=300)


class TestScipyAgreement:
    def test_dagostino_matches_normaltest(self, gaussian_sample, skewed_sample):
        for x in (gaussian_sample, skewed_sample):
            stat, p = dagostino_k2(x)
            ref = st.normaltest(x)
            assert stat == pytest.approx(ref.statistic, rel=1e-10)
            assert p == pytest.approx(ref.pvalue, rel=1e-8)

    def test_ks_distance_matches_kstest(self, gaussian_sample, skewed_sample):
        for x in (gaussian_sample, skewed_sample):
            d, p = ks_normal(x)
            ref = st.kstest(x, "norm", args=(x.mean(), x.std()))
            assert d == pytest.approx(ref.statistic, abs=1e-12)
            assert 0.0 <= p <= 1.0

    def test_ks_p_uses_effective_sample_size(self, gaussian_sample):
        d, p = ks_normal(gaussian_sample)
        n = gaussian_sample.size
        lam = (math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n)) * d
        expected = sum(
            2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
            for j in range(1, 80)
        )
        assert p == pytest.approx(expected, abs=1e-10)

    def test_anderson_matches_scipy(self, gaussian_sample, skewed_sample):
        for x in (gaussian_sample, skewed_sample):
            stat, critical = anderson_darling_normal(x)
            ref = st.anderson(x, "norm")
            assert stat == pytest.approx(ref.statistic, rel=1e-8)
            # scipy publishes the same critical values rounded to three
            # decimals; ours keep full precision.
            assert np.max(np.abs(np.array(critical) - ref.critical_values)) < 1e-3


class TestNormalityReport:
    def test_gaussian_sample_accepted(self, gaussian_sample):
        report = normality_tests(gaussian_sample)
        assert report.rejects(0.01) == {"dagostino": False, "ks": False, "anderson": False}
        assert report.n == 300

    def test_emg_sample_rejected(self):
        x = st.exponnorm.rvs(
            2.057, loc=0.313, scale=0.0586, size=500,
            random_state=np.random.default_rng(103),
        )
        report = normality_tests(x)
        assert report.rejects(0.01) == {"dagostino": True, "ks": True, "anderson": True}

    def test_anderson_level_selection(self, gaussian_sample):
        report = normality_tests(gaussian_sample)
        assert report.anderson_significance == ANDERSON_SIGNIFICANCE
        # alpha = 0.05 compares against the 5 percent column, alpha = 0.01
        # against the 1 percent column.
        crit = dict(zip(report.anderson_significance, report.anderson_critical))
        assert report.rejects(0.05)["anderson"] == (report.anderson_stat > crit[5.0])
        assert report.rejects(0.01)["anderson"] == (report.anderson_stat > crit[1.0])

    def test_to_json_shape(self, gaussian_sample):
        payload = normality_tests(gaussian_sample).to_json()
        assert set(payload) == {"n", "dagostino", "ks", "anderson"}
        assert set(payload["anderson"]) == {
            "statistic", "critical_values", "significance_levels_percent",
        }

    def test_minimum_sample_size(self):
        with pytest.raises(ValueError, match="at least 20"):
            normality_tests(np.arange(19, dtype=float))


class TestFitRecovery:
    def test_lognormal_parameters_recovered(self):
        rng = np.random.default_rng(104)
        x = st.lognorm.rvs(0.8, loc=0.0, scale=0.2, size=1200, random_state=rng)
        fit = fit_distribution(x, "lognormal")
        assert fit.family == "lognormal"
        assert fit.params["shape"] == pytest.approx(0.8, abs=0.1)
        assert fit.params["loc"] == pytest.approx(0.0, abs=0.03)
        assert fit.params["scale"] == pytest.approx(0.2, rel=0.2)
        assert fit.n == 1200

    def test_normal_closed_form(self):
        rng = np.random.default_rng(105)
        x = rng.normal(5.0, 1.5, size=400)
        fit = fit_distribution(x, "normal")
        assert fit.params["loc"] == pytest.approx(float(x.mean()))
        assert fit.params["scale"] == pytest.approx(float(x.std()))
        assert fit.loglik == pytest.approx(
            float(st.norm.logpdf(x, x.mean(), x.std()).sum())
        )

    def test_emg_likelihood_dominates_truth(self):
        # The MLE must not be beaten by the generating parameters.
        rng = np.random.default_rng(106)
        x = st.exponnorm.rvs(2.057, loc=0.313, scale=0.0586, size=600, random_state=rng)
        fit = fit_distribution(x, "emg")
        true_loglik = float(st.exponnorm.logpdf(x, 2.057, loc=0.313, scale=0.0586).sum())
        assert fit.loglik >= true_loglik - 1e-6
        assert fit.params["shape"] == pytest.approx(2.057, rel=0.5)
        assert fit.params["loc"] == pytest.approx(0.313, abs=0.05)

    def test_information_criteria_consistent(self):
        rng = np.random.default_rng(107)
        x = rng.normal(0.0, 1.0, size=200)
        for family, k_params in (("lognormal", 3), ("emg", 3), ("normal", 2)):
            fit = fit_distribution(x, family)
            assert fit.aic == pytest.approx(2 * k_params - 2 * fit.loglik)
            assert fit.bic == pytest.approx(k_params * math.log(200) - 2 * fit.loglik)

    def test_fit_all_covers_every_family(self):
        rng = np.random.default_rng(108)
        x = rng.normal(1.0, 0.3, size=120)
        fits = fit_all(x)
        assert set(fits) == set(FAMILIES)
        for family, fit in fits.items():
            assert fit.family == family
            assert fit.sse >= 0.0


class TestGuards:
    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            fit_distribution(np.arange(40, dtype=float), "weibull")

    def test_too_few_samples_to_fit(self):
        with pytest.raises(ValueError, match="at least 30"):
            fit_distribution(np.arange(29, dtype=float), "normal")

    def test_constant_sample(self):
        with pytest.raises(ValueError, match="constant"):
            fit_distribution(np.full(50, 2.0), "normal")

    def test_non_finite_sample(self):
        x = np.arange(50, dtype=float)
        x[3] = math.nan
        with pytest.raises(ValueError, match="finite"):
            fit_distribution(x, "normal")

    def test_two_dimensional_sample(self):
        with pytest.raises(ValueError, match="one-dimensional"):
            fit_distribution(np.ones((10, 10)), "normal")
