import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadlag import (DataError, LoadingMatrix, LoadingVector, ModelSpec,
                     ScaleMatrix, ValidationError, attenuation,
                     correlation_loading, dense_eigenvalues,
                     equicorrelation_eigenvalues, factor_eigencurve,
                     factor_eigenvalues, factor_strength_matrix,
                     factor_strengths, gram_eigenvalues, loading_matrix,
                     loading_vector, reduced_determinant, secular_eigenvalues,
                     secular_function, theoretical_correlation,
                     top_eigenvalue_approx)


def assemble_one_factor(rho):
    matrix = np.outer(rho, rho)
    np.fill_diagonal(matrix, 1.0)
    return matrix


def random_loadings(rng, n):
    return LoadingVector(rng.uniform(-0.99, 0.99, n))


def blockwise_loadings(n, block_sizes, row_sq):
    """Disjoint-support factor columns: exactly orthogonal, saturated rows."""
    rho = np.zeros((n, len(block_sizes)))
    start = 0
    for f, (size, r2) in enumerate(zip(block_sizes, row_sq)):
        rho[start:start + size, f] = math.sqrt(r2)
        start += size
    return LoadingMatrix(rho)


class TestEquicorrelation:
    def test_zero_loading_is_identity(self):
        spec = equicorrelation_eigenvalues(7, 0.0)
        assert np.array_equal(spec.eigenvalues, np.ones(7))
        assert np.array_equal(spec.multiplicities, np.full(7, 7))

    def test_direct_substitution(self):
        spec = equicorrelation_eigenvalues(3, 0.5)
        assert np.allclose(spec.eigenvalues, [2.0, 0.5, 0.5])
        assert np.array_equal(spec.multiplicities, [1, 2, 2])

    def test_market_size_saturation(self):
        # gamma=0.17, alpha=0.16, tau -> inf: exact equal-loading saturation.
        # The fitted-formula limit (~128) intentionally sits above this exact
        # level (~104) by roughly (1 + gamma/attenuation(inf)): the formula is
        # a large-eigenvalue approximation, not the equal-loading closed form.
        rho_inf_sq = correlation_loading(0.17, 0.16, math.inf) ** 2
        assert rho_inf_sq == pytest.approx(1.0 / (1.0 + (1 - 0.16) ** 2 / 0.17), rel=1e-12)
        top = equicorrelation_eigenvalues(533, rho_inf_sq).eigenvalues[0]
        assert top == pytest.approx(1 + 532 * rho_inf_sq, rel=1e-12)
        approx_limit = 533 * 0.17 / (1 - 0.16) ** 2
        assert approx_limit / top == pytest.approx(1 + 0.17 / 0.7056, rel=0.02)

    def test_domain(self):
        with pytest.raises(ValidationError):
            equicorrelation_eigenvalues(3, 1.2)
        with pytest.raises(ValidationError):
            equicorrelation_eigenvalues(0, 0.3)


class TestCorrelationLoading:
    def test_strong_signal_limit(self):
        assert correlation_loading(1e12, 0.3, 5) == pytest.approx(1.0, abs=1e-6)

    def test_memoryless_is_scale_free(self):
        values = {correlation_loading(0.5, 0.0, tau) for tau in (1, 2, 64, 4096)}
        assert len(values) == 1
        assert values.pop() ** 2 == pytest.approx(0.5 / 1.5, rel=1e-12)

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValidationError, match="gamma"):
            correlation_loading(0.0, 0.2, 4)

    def test_matches_loading_vector_from_spec(self):
        spec = ModelSpec.single_factor(4, 0.3, 0.25)
        lv = loading_vector(spec, 8)
        assert np.allclose(lv.rho, correlation_loading(0.3, 0.25, 8), rtol=1e-13)


class TestSecularEigenvalues:
    def test_equal_loadings_match_closed_form(self):
        rho = np.full(12, 0.6)
        sec = secular_eigenvalues(LoadingVector(rho))
        closed = equicorrelation_eigenvalues(12, 0.36)
        assert np.max(np.abs(sec.eigenvalues - closed.eigenvalues)) < 1e-12
        assert np.array_equal(sec.multiplicities, closed.multiplicities)

    def test_two_by_two_closed_form(self):
        a, b = 0.7, 0.2
        sec = secular_eigenvalues(LoadingVector(np.array([a, b])))
        assert np.max(np.abs(sec.eigenvalues - np.array([1 + a * b, 1 - a * b]))) < 1e-12

    def test_random_against_dense_oracle(self):
        rng = np.random.default_rng(6)
        lv = random_loadings(rng, 50)
        sec = secular_eigenvalues(lv).eigenvalues
        dense = np.linalg.eigvalsh(assemble_one_factor(lv.rho))[::-1]
        assert np.max(np.abs(sec - dense)) < 1e-8

    def test_zero_loadings_contribute_unit_eigenvalue(self):
        rho = np.array([0.0, 0.5, 0.0, -0.3, 0.0])
        sec = secular_eigenvalues(LoadingVector(rho))
        assert np.sum(np.isclose(sec.eigenvalues, 1.0, atol=1e-14)) == 3

    def test_tied_group_multiplicity(self):
        rho = np.array([0.4, 0.4, -0.4, 0.8, 0.1])
        sec = secular_eigenvalues(LoadingVector(rho))
        tied = 1.0 - 0.16
        assert np.sum(np.isclose(sec.eigenvalues, tied, atol=1e-12)) == 2
        dense = np.linalg.eigvalsh(assemble_one_factor(rho))[::-1]
        assert np.max(np.abs(sec.eigenvalues - dense)) < 1e-10

    def test_rejects_invalid_loadings(self):
        with pytest.raises(ValidationError, match="not a valid correlation structure"):
            LoadingVector(np.array([0.5, 1.2]))

    def test_trace_conservation(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            lv = random_loadings(rng, int(rng.integers(2, 40)))
            sec = secular_eigenvalues(lv)
            n = lv.n_assets
            assert abs(sec.trace - n) < 1e-9 * n

    def test_eigenvectors_are_orthonormal_and_consistent(self):
        rho = np.array([0.0, 0.6, 0.6, -0.6, 0.3, 0.0, 0.85])
        sec = secular_eigenvalues(LoadingVector(rho), with_vectors=True)
        matrix = assemble_one_factor(rho)
        resid = matrix @ sec.eigenvectors - sec.eigenvectors * sec.eigenvalues[None, :]
        assert np.max(np.abs(resid)) < 1e-9 * np.max(np.abs(matrix))
        gram = sec.eigenvectors.T @ sec.eigenvectors
        assert np.max(np.abs(gram - np.eye(len(rho)))) < 1e-9

    @given(st.lists(st.floats(min_value=-0.98, max_value=0.98), min_size=2, max_size=12))
    def test_property_matches_dense(self, rho):
        lv = LoadingVector(np.asarray(rho))
        sec = secular_eigenvalues(lv).eigenvalues
        dense = np.linalg.eigvalsh(assemble_one_factor(lv.rho))[::-1]
        assert np.max(np.abs(sec - dense)) < 1e-8


class TestSecularStructure:
    def test_interlacing_and_monotone_f(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(3, 30))
            lv = random_loadings(rng, n)  # continuous draws: no ties, no zeros
            z = np.sort(1.0 - lv.rho**2)
            brackets = list(zip(z[:-1], z[1:])) + [(z[-1], z[-1] + np.sum(lv.rho**2))]
            eigs = secular_eigenvalues(lv).eigenvalues
            for lo, hi in brackets:
                inside = [v for v in eigs if lo < v < hi + 1e-12]
                assert len(inside) == 1
                probes = np.linspace(lo, hi, 12)[1:-1]
                values = [secular_function(lv, p) for p in probes]
                assert np.all(np.diff(values) < 0.0)
            assert z[0] - 1e-12 <= eigs[-1] <= z[1] + 1e-12

    def test_one_factor_bulk_stays_below_one(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            lv = LoadingVector(rng.uniform(0.05, 0.95, int(rng.integers(2, 40))))
            eigs = secular_eigenvalues(lv).eigenvalues
            assert eigs[1] < 1.0

    def test_positivity_when_loadings_admissible(self):
        eps = 1e-9
        lv = LoadingVector(np.array([1.0, math.sqrt(1 - eps), 0.5, 0.2]))
        eigs = secular_eigenvalues(lv).eigenvalues
        assert eigs[-1] >= -1e-12

    def test_negativity_when_loadings_exceed_one(self):
        # two loadings just above 1 (rejected by the type, so assembled raw)
        rho = np.array([1.0001, 1.0001, 0.4, 0.1])
        eigs = np.linalg.eigvalsh(assemble_one_factor(rho))
        assert eigs[0] < 0.0


class TestTopEigenvalueApprox:
    def test_equal_loading_gap_is_exact(self):
        n, r2 = 20, 0.3
        lv = LoadingVector(np.full(n, math.sqrt(r2)))
        approx = top_eigenvalue_approx(lv)
        exact = equicorrelation_eigenvalues(n, r2).eigenvalues[0]
        assert exact - approx == pytest.approx(1 - r2, rel=1e-12)

    def test_market_sized_accuracy(self):
        rng = np.random.default_rng(8)
        rho = np.sqrt(rng.uniform(0.05, 0.29, 533))  # mean rho^2 ~ 0.17
        lv = LoadingVector(rho)
        approx = top_eigenvalue_approx(lv)
        exact = secular_eigenvalues(lv).eigenvalues[0]
        assert abs(approx - exact) / exact < 0.02

    def test_single_asset_breakdown(self):
        lv = LoadingVector(np.array([0.5]))
        assert top_eigenvalue_approx(lv) == pytest.approx(0.25)
        assert secular_eigenvalues(lv).eigenvalues[0] == pytest.approx(1.0)

    def test_bracketing_bounds(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            lv = LoadingVector(rng.uniform(0.1, 0.95, int(rng.integers(2, 60))))
            approx = top_eigenvalue_approx(lv)
            exact = secular_eigenvalues(lv).eigenvalues[0]
            assert approx <= exact + 1e-12
            assert exact <= approx + (1 - np.min(lv.rho**2)) + 1e-12


class TestReducedDeterminant:
    def test_one_factor_reduction_vanishes_at_secular_roots(self):
        rng = np.random.default_rng(15)
        rho = rng.uniform(0.1, 0.9, 12)
        lm = LoadingMatrix(rho[:, None])
        lv = LoadingVector(rho)
        top = secular_eigenvalues(lv).eigenvalues[0]
        assert abs(reduced_determinant(lm, top)) < 1e-9
        assert reduced_determinant(lm, top + 0.5) * reduced_determinant(lm, top - 0.05) < 0

    def test_large_lambda_limit(self):
        rng = np.random.default_rng(16)
        lm = LoadingMatrix(rng.uniform(-0.5, 0.5, (10, 2)))
        assert reduced_determinant(lm, 1e9) == pytest.approx(1.0, abs=1e-6)

    def test_singularity_guard(self):
        lm = LoadingMatrix(np.array([[0.6], [0.3]]))
        with pytest.raises(DataError, match="singular"):
            reduced_determinant(lm, 1.0 - 0.36 + 1e-13)

    def test_two_factor_roots_match_dense(self):
        spec = ModelSpec.orthogonal_factors(20, [0.6, 0.25], 0.2, seed=2)
        lm = loading_matrix(spec, 8)
        roots = factor_eigenvalues(lm)
        dense = dense_eigenvalues(theoretical_correlation(spec, 8)).eigenvalues
        above = dense[dense > 1.0]
        assert roots.size == above.size
        assert np.max(np.abs(roots - above)) < 1e-8


class TestGramEigenvalues:
    def test_orthogonal_columns_give_column_norms(self):
        lm = blockwise_loadings(100, (70, 20, 10), (0.857, 0.8, 0.8))
        norms = (lm.rho**2).sum(axis=0)
        assert np.allclose(gram_eigenvalues(lm), np.sort(norms)[::-1], rtol=1e-12)

    def test_single_factor_consistency(self):
        rng = np.random.default_rng(17)
        rho = rng.uniform(0.0, 0.9, 30)
        lm = LoadingMatrix(rho[:, None])
        assert gram_eigenvalues(lm)[0] == pytest.approx(
            top_eigenvalue_approx(LoadingVector(rho)), rel=1e-12)

    def test_separated_factors_within_five_percent_of_dense(self):
        # well-separated column norms ~ {60, 16, 8} with saturated rows
        lm = blockwise_loadings(100, (70, 20, 10), (0.857, 0.8, 0.8))
        mu = gram_eigenvalues(lm)
        corr = np.diag(1.0 - lm.row_norms_sq()) + lm.rho @ lm.rho.T
        dense = np.linalg.eigvalsh(corr)[::-1][:3]
        assert np.max(np.abs(mu - dense) / dense) < 0.05


class TestFactorStrengths:
    def test_single_factor_is_mean_snr(self):
        rng = np.random.default_rng(18)
        beta = rng.normal(0, 0.5, (40, 1))
        sigma = rng.uniform(0.5, 2.0, 40)
        spec = ModelSpec(40, 1, 0.2, sigma, 1.3, beta)
        expected = np.mean(1.3**2 * beta[:, 0] ** 2 / sigma**2)
        assert factor_strengths(spec)[0] == pytest.approx(expected, rel=1e-12)

    def test_weighted_orthogonality_zeroes_offdiagonal(self):
        sigma = np.random.default_rng(19).uniform(0.5, 2.0, 30)
        raw = np.random.default_rng(20).normal(size=(30, 2))
        # orthogonalize the columns under the 1/sigma^2 weighting
        w = 1.0 / sigma**2
        raw[:, 1] -= raw[:, 0] * (raw[:, 0] * w @ raw[:, 1]) / (raw[:, 0] * w @ raw[:, 0])
        spec = ModelSpec(30, 2, 0.1, sigma, 1.0, raw)
        values = factor_strength_matrix(spec).values
        assert abs(values[0, 1]) < 1e-12 * max(values[0, 0], values[1, 1])

    def test_uniform_spec(self):
        spec = ModelSpec(25, 1, 0.3, 1.0, 1.0, 0.4)
        assert factor_strengths(spec)[0] == pytest.approx(0.16, rel=1e-12)


class TestFactorEigencurve:
    TAUS = (1, 2, 4, 8, 16, 32, 64, 128)

    def test_memoryless_flat_at_market_amplitude(self):
        curve = factor_eigencurve(533, 0.17, 0.0, self.TAUS)
        assert np.allclose(curve.values, 533 * 0.17)
        assert abs(curve.values[0] - 90.0) < 1.0

    def test_market_limit_anchor(self):
        limit = 533 * 0.17 / attenuation(0.16, math.inf)
        assert abs(limit - 128.0) < 1.0
        far_out = factor_eigencurve(533, 0.17, 0.16, [1 << 20]).values[0]
        assert far_out == pytest.approx(limit, rel=1e-4)

    def test_unit_scale_value(self):
        curve = factor_eigencurve(100, 0.2, 0.3, self.TAUS)
        assert curve.values[0] == pytest.approx(100 * 0.2 / (1 - 0.09), rel=1e-12)

    def test_strictly_increasing_for_positive_alpha(self):
        curve = factor_eigencurve(50, 0.1, 0.4, self.TAUS)
        assert np.all(np.diff(curve.values) > 0.0)

    def test_rejects_nonpositive_strength(self):
        with pytest.raises(ValidationError, match="strength"):
            factor_eigencurve(10, 0.0, 0.2, self.TAUS)


class TestDenseEigenvalues:
    def test_identity(self):
        spectrum = dense_eigenvalues(ScaleMatrix(np.eye(9), 1, "correlation"))
        assert np.array_equal(spectrum.eigenvalues, np.ones(9))

    def test_matches_equicorrelation_closed_form(self):
        matrix = assemble_one_factor(np.full(15, 0.55))
        spectrum = dense_eigenvalues(ScaleMatrix(matrix, 1, "correlation"))
        closed = equicorrelation_eigenvalues(15, 0.55**2)
        assert np.max(np.abs(spectrum.eigenvalues - closed.eigenvalues)) < 1e-10

    def test_trace_and_determinant_identities(self):
        rng = np.random.default_rng(23)
        raw = rng.normal(size=(8, 8))
        sym = 0.5 * (raw + raw.T)
        spectrum = dense_eigenvalues(ScaleMatrix(sym, 1, "covariance"))
        assert spectrum.trace == pytest.approx(np.trace(sym), abs=1e-10)
        # LU-based determinant is independent of the symmetric eigensolver
        det_lu = np.linalg.det(sym)
        assert np.prod(spectrum.eigenvalues) == pytest.approx(det_lu, rel=1e-8)

    def test_eigenvector_residuals(self):
        rng = np.random.default_rng(24)
        raw = rng.normal(size=(20, 20))
        sym = 0.5 * (raw + raw.T)
        spectrum = dense_eigenvalues(ScaleMatrix(sym, 1, "covariance"), with_vectors=True)
        resid = sym @ spectrum.eigenvectors - spectrum.eigenvectors * spectrum.eigenvalues
        assert np.max(np.abs(resid)) < 1e-9 * np.max(np.abs(sym))

    def test_asymmetric_input_rejected_at_type_boundary(self):
        with pytest.raises(ValidationError, match="symmetric"):
            ScaleMatrix(np.array([[1.0, 2.0], [1.0, 1.0]]), 1, "covariance")
