"""Mixture family: types, densities, responsibilities, classification."""

import numpy as np
import pytest

import frozen_values as fv
from tailmix.errors import (
    ContractError,
    DataError,
    DomainError,
    UnsupportedOperationError,
)
from tailmix.mixture import (
    BinnedSeries,
    MixtureParams,
    ModelSpec,
    component_log_pmfs,
    log_likelihood,
    mixture_log_pmf,
    mixture_pmf,
    responsibilities,
    sample_mixture,
    tail_threshold,
)

EP = ModelSpec(n_exp=1)
EEP = ModelSpec(n_exp=2)
P = ModelSpec(n_exp=0)


class TestModelSpec:
    def test_labels_and_dof(self):
        assert (P.label, EP.label, EEP.label) == ("P", "EP", "EEP")
        assert (P.dof, EP.dof, EEP.dof) == (1, 3, 5)
        assert EEP.n_components == 3

    def test_validation(self):
        with pytest.raises(DomainError):
            ModelSpec(n_exp=3)
        with pytest.raises(DomainError):
            ModelSpec(n_exp=1, has_pareto=False)
        with pytest.raises(DomainError):
            ModelSpec(n_exp=1, x_min=0)
        with pytest.raises(DomainError):
            ModelSpec(n_exp=1, exp_mode="fancy")


class TestMixtureParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            MixtureParams((0.5, 0.6), (0.2,), 1.6)  # sum > 1
        with pytest.raises(DomainError):
            MixtureParams((1.2, -0.2), (0.2,), 1.6)
        with pytest.raises(DomainError):
            MixtureParams((0.5, 0.5), (0.2, 0.3), 1.6)  # length mismatch
        with pytest.raises(DomainError):
            MixtureParams((0.5, 0.5), (-0.2,), 1.6)
        with pytest.raises(DomainError):
            MixtureParams((0.5, 0.5), (0.2,), 1.0)

    def test_canonical_orders_rates_descending(self):
        swapped = MixtureParams((0.4, 0.3, 0.3), (0.15, 1.5), 1.6)
        canon = swapped.canonical()
        assert canon.lambdas == (1.5, 0.15)
        assert canon.weights == (0.3, 0.4, 0.3)
        assert canon.alpha == swapped.alpha

    def test_loglik_invariant_under_component_relabeling(self):
        a = MixtureParams((0.3, 0.4, 0.3), (1.5, 0.15), 1.6)
        b = MixtureParams((0.4, 0.3, 0.3), (0.15, 1.5), 1.6)
        counts = np.array([1, 2, 3, 5, 9, 40, 200])
        assert log_likelihood(counts, EEP, a) == pytest.approx(
            log_likelihood(counts, EEP, b), rel=1e-14
        )

    def test_compat_checked(self):
        with pytest.raises(ContractError):
            log_likelihood(np.array([1, 2]), EEP, MixtureParams((0.5, 0.5), (0.2,), 1.6))


class TestDensities:
    def test_frozen_pmf_value(self):
        params = MixtureParams((0.5, 0.5), (np.log(2.0),), 2.0)
        assert mixture_pmf(1, EP, params) == pytest.approx(fv.EP_PMF_AT_1, abs=1e-9)
        assert mixture_log_pmf(1, EP, params) == pytest.approx(
            fv.EP_LOG_PMF_AT_1, abs=1e-9
        )

    def test_mixture_is_convex_combination(self):
        params = MixtureParams((0.3, 0.4, 0.3), (1.5, 0.15), 1.6)
        xs = np.array([1, 2, 10, 100])
        comp = np.exp(component_log_pmfs(xs, EEP, params))
        direct = (np.array(params.weights)[:, None] * comp).sum(axis=0)
        np.testing.assert_allclose(mixture_pmf(xs, EEP, params), direct, rtol=1e-12)

    def test_log_likelihood_equals_weighted_log_pmf_sum(self):
        params = MixtureParams((0.5, 0.5), (0.3,), 1.7)
        counts = np.array([1, 1, 2, 3, 3, 3, 17, 120])
        direct = mixture_log_pmf(counts, EP, params).sum()
        assert log_likelihood(counts, EP, params) == pytest.approx(direct, rel=1e-12)

    def test_log_likelihood_names_offending_index(self):
        params = MixtureParams((0.5, 0.5), (0.3,), 1.7)
        with pytest.raises(DataError, match="index 2"):
            log_likelihood(np.array([3, 1, 0, 5]), EP, params)
        with pytest.raises(DataError, match="empty"):
            log_likelihood(np.array([], dtype=np.int64), EP, params)


class TestResponsibilities:
    PARAMS = MixtureParams((0.5, 0.5), (1.0,), 2.0)

    def test_rows_sum_to_one(self):
        resp = responsibilities(np.arange(1, 50), EP, self.PARAMS)
        assert resp.shape == (49, 2)
        np.testing.assert_allclose(resp.sum(axis=1), 1.0, atol=1e-12)

    def test_frozen_tail_responsibility(self):
        resp = responsibilities(20, EP, self.PARAMS)
        assert resp.shape == (2,)
        assert resp[-1] == pytest.approx(fv.TAIL_RESP_AT_20, abs=1e-9)

    def test_tail_threshold_frozen_case(self):
        assert tail_threshold(EP, self.PARAMS) == fv.TAIL_THRESHOLD_RATE1
        resp3 = responsibilities(3, EP, self.PARAMS)[-1]
        resp4 = responsibilities(4, EP, self.PARAMS)[-1]
        assert resp3 < 0.5 <= resp4

    def test_tail_threshold_is_smallest_crossing(self):
        params = MixtureParams((0.3, 0.4, 0.3), (2.5, 0.6), 2.2)
        got = tail_threshold(EEP, params)
        xs = np.arange(1, 2000)
        r = responsibilities(xs, EEP, params)[:, -1]
        brute = int(xs[np.nonzero(r >= 0.5)[0][0]])
        assert got == brute

    def test_pure_tail_model_starts_at_x_min(self):
        assert tail_threshold(P, MixtureParams((1.0,), (), 1.6)) == 1
        spec = ModelSpec(n_exp=0, x_min=4)
        assert tail_threshold(spec, MixtureParams((1.0,), (), 1.6)) == 4


class TestBinnedSeries:
    def test_validation(self):
        with pytest.raises(DataError, match="index 1"):
            BinnedSeries(np.array([3, -1, 2]), bin_seconds=4)
        with pytest.raises(DataError):
            BinnedSeries(np.array([1.5, 2.0]), bin_seconds=4)
        with pytest.raises(DataError):
            BinnedSeries(np.array([[1, 2]]), bin_seconds=4)
        with pytest.raises(DataError):
            BinnedSeries(np.array([1, 2]), bin_seconds=0)

    def test_counts_are_read_only(self):
        s = BinnedSeries(np.array([1, 2, 3]), bin_seconds=4)
        with pytest.raises(ValueError):
            s.counts[0] = 9

    def test_fingerprint_tracks_data(self):
        a = BinnedSeries(np.array([1, 2, 3]), bin_seconds=4)
        b = BinnedSeries(np.array([1, 2, 3]), bin_seconds=4)
        c = BinnedSeries(np.array([1, 2, 4]), bin_seconds=4)
        d = BinnedSeries(np.array([1, 2, 3]), bin_seconds=8)
        assert a.fingerprint() == b.fingerprint()
        assert a.fingerprint() != c.fingerprint()
        assert a.fingerprint() != d.fingerprint()

    def test_zero_counts_allowed_in_container(self):
        # zeros are storable (binning may keep them); only fitting rejects
        s = BinnedSeries(np.array([0, 2, 3]), bin_seconds=4)
        assert s.n == 3


class TestSampling:
    def test_deterministic(self):
        params = MixtureParams((0.3, 0.4, 0.3), (1.5, 0.15), 1.6)
        a = sample_mixture(EEP, params, 2000, seed=5)
        b = sample_mixture(EEP, params, 2000, seed=5)
        np.testing.assert_array_equal(a, b)
        assert a.min() >= 1

    def test_component_mix_respected(self):
        import scipy.special

        params = MixtureParams((0.7, 0.3), (5.0,), 3.5)
        xs = sample_mixture(EP, params, 100_000, seed=6)
        expected = 0.7 * (1 - np.exp(-5.0)) + 0.3 / scipy.special.zeta(3.5, 1)
        assert (xs == 1).mean() == pytest.approx(expected, abs=0.01)

    def test_literal_mode_refused(self):
        spec = ModelSpec(n_exp=1, exp_mode="paper-literal")
        params = MixtureParams((0.5, 0.5), (0.3,), 1.7)
        with pytest.raises(UnsupportedOperationError):
            sample_mixture(spec, params, 10, seed=0)

    def test_literal_pure_tail_still_samples(self):
        spec = ModelSpec(n_exp=0, exp_mode="paper-literal")
        xs = sample_mixture(spec, MixtureParams((1.0,), (), 2.0), 100, seed=0)
        assert xs.min() >= 1
