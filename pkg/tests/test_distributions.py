"""Distribution samplers against quadrature oracles and closed forms."""
from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from alqpanel import (
    GigHalfParams,
    NumericError,
    ParameterError,
    RngStream,
    ald_logpdf,
    mixture_constants,
    sample_gamma,
    sample_gaussian_from_precision,
    sample_gig_half,
    sample_inverse_gamma,
    sample_uniform01,
)

from .oracles import (
    log_grid,
    gamma_log_kernel,
    gig_half_log_kernel,
    inverse_gamma_log_kernel,
    kernel_moment,
    ks_distance,
    normalized_cdf,
    positive_grid,
    quantile_from_cdf,
)


def rng(stream: int = 0) -> RngStream:
    return RngStream(seed=20240117, stream_id=stream)


class TestGigHalf:
    @pytest.mark.parametrize(
        "rho1,rho2,expected_mean",
        [(1.0, 1.0, 2.0), (4.0, 1.0, 3.0), (1.0, 4.0, 0.75)],
    )
    def test_mean_matches_quadrature_and_closed_form(self, rho1, rho2, expected_mean):
        # closed form at index 1/2: sqrt(rho1/rho2) * (1 + 1/sqrt(rho1*rho2))
        grid = positive_grid(200.0)
        oracle_mean = kernel_moment(gig_half_log_kernel(rho1, rho2), grid)
        assert oracle_mean == pytest.approx(expected_mean, rel=1e-4)
        draws = sample_gig_half(GigHalfParams(rho1, rho2), rng(), size=10**6)
        assert draws.mean() == pytest.approx(expected_mean, rel=0.01)
        assert np.all(draws > 0.0) and np.all(np.isfinite(draws))

    @pytest.mark.parametrize("rho1,rho2", [(1.0, 1.0), (4.0, 1.0), (0.3, 2.5)])
    def test_ks_against_quadrature(self, rho1, rho2):
        grid = positive_grid(300.0)
        cdf = normalized_cdf(gig_half_log_kernel(rho1, rho2), grid)
        draws = sample_gig_half(GigHalfParams(rho1, rho2), rng(1), size=10**5)
        assert ks_distance(draws, grid, cdf) < 0.02

    def test_reciprocal_identity(self):
        # 1/X for X ~ GIG(1/2, a, b) follows the GIG(-1/2, b, a) kernel
        a, b = 2.0, 3.0
        draws = 1.0 / sample_gig_half(GigHalfParams(a, b), rng(2), size=10**6)

        def recip_logk(x):
            return -1.5 * np.log(x) - 0.5 * (b / x + a * x)

        grid = positive_grid(100.0)
        assert draws.mean() == pytest.approx(kernel_moment(recip_logk, grid), rel=0.02)
        assert (draws**2).mean() == pytest.approx(
            kernel_moment(recip_logk, grid, power=2), rel=0.02
        )
        cdf = normalized_cdf(recip_logk, grid)
        assert ks_distance(draws[:10**5], grid, cdf) < 0.02

    def test_degenerate_rho1_zero_is_gamma(self):
        # GIG(1/2, 0, b) collapses to Gamma(shape 1/2, rate b/2)
        b = 3.0
        draws = sample_gig_half(GigHalfParams(0.0, b), rng(3), size=10**5)
        assert np.all(draws > 0.0)
        ks = stats.kstest(draws, stats.gamma(a=0.5, scale=2.0 / b).cdf).statistic
        assert ks < 0.02

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            GigHalfParams(1.0, 0.0)
        with pytest.raises(ParameterError):
            GigHalfParams(1.0, -2.0)
        with pytest.raises(ParameterError):
            GigHalfParams(-0.5, 1.0)

    def test_tiny_rho1_stays_positive_and_finite(self):
        draws = sample_gig_half(GigHalfParams(1e-290, 2.0), rng(4), size=10**4)
        assert np.all(draws > 0.0) and np.all(np.isfinite(draws))


class TestGaussianFromPrecision:
    def test_identity_precision_is_standard_normal(self):
        draws = sample_gaussian_from_precision(np.eye(2), np.zeros(2), rng(5), size=10**6)
        assert np.abs(draws.mean(axis=0)).max() < 0.01
        assert np.allclose(draws.var(axis=0), 1.0, rtol=0.02)

    def test_one_dimensional_case(self):
        draws = sample_gaussian_from_precision(np.array([[4.0]]), np.array([8.0]), rng(6), size=10**6)
        assert draws.mean() == pytest.approx(2.0, abs=0.01)
        assert draws.var() == pytest.approx(0.25, rel=0.02)

    def test_correlated_case_against_dense_inverse(self):
        prec = np.array([[2.0, 1.0], [1.0, 2.0]])
        lin = np.array([3.0, 3.0])
        cov_expected = np.linalg.inv(prec)  # dense 2x2 oracle
        mean_expected = cov_expected @ lin
        assert np.allclose(mean_expected, [1.0, 1.0])
        assert np.allclose(cov_expected, [[2 / 3, -1 / 3], [-1 / 3, 2 / 3]])
        draws = sample_gaussian_from_precision(prec, lin, rng(7), size=10**6)
        assert np.allclose(draws.mean(axis=0), mean_expected, atol=0.01)
        assert np.allclose(np.cov(draws.T), cov_expected, rtol=0.02, atol=0.005)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_sample_precision_recovers_input(self, dim):
        base = rng(8 + dim)
        a = base.generator.standard_normal((dim, dim))
        prec = a @ a.T + dim * np.eye(dim)
        draws = sample_gaussian_from_precision(prec, np.zeros(dim), base, size=10**6)
        prec_hat = np.linalg.inv(np.cov(draws.T).reshape(dim, dim))
        assert np.allclose(prec_hat, prec, rtol=0.05, atol=0.02)

    def test_non_positive_definite_reports_pivot(self):
        bad = np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(NumericError) as excinfo:
            sample_gaussian_from_precision(bad, np.zeros(3), rng(12))
        assert excinfo.value.pivot_index == 2

    def test_rejects_asymmetric_input(self):
        with pytest.raises(ParameterError):
            sample_gaussian_from_precision(
                np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2), rng(13)
            )

    def test_scalar_ks_against_quadrature(self):
        prec, lin = 2.5, 1.25  # N(0.5, 0.4)

        def logk(x):
            return -0.5 * prec * (x - lin / prec) ** 2

        grid = np.linspace(-6.0, 7.0, 400001)
        cdf = normalized_cdf(logk, grid)
        draws = sample_gaussian_from_precision(
            np.array([[prec]]), np.array([lin]), rng(14), size=10**5
        )[:, 0]
        assert ks_distance(draws, grid, cdf) < 0.02


class TestGamma:
    def test_exponential_special_case(self):
        draws = sample_gamma(1.0, 1.0, rng(15), size=10**6)
        assert draws.mean() == pytest.approx(1.0, rel=0.01)

    def test_moments(self):
        draws = sample_gamma(3.0, 2.0, rng(16), size=10**6)
        assert draws.mean() == pytest.approx(1.5, rel=0.02)
        assert draws.var() == pytest.approx(0.75, rel=0.02)

    def test_small_shape_mean(self):
        draws = sample_gamma(0.5, 10.0, rng(17), size=10**6)
        assert draws.mean() == pytest.approx(0.05, rel=0.02)

    @pytest.mark.parametrize("shape,rate", [(1.0, 1.0), (3.0, 2.0), (0.5, 10.0)])
    def test_ks_against_quadrature(self, shape, rate):
        hi = (shape + 40.0) / rate
        grid = positive_grid(hi)
        cdf = normalized_cdf(gamma_log_kernel(shape, rate), grid)
        draws = sample_gamma(shape, rate, rng(18), size=10**5)
        assert ks_distance(draws, grid, cdf) < 0.02

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            sample_gamma(0.0, 1.0, rng())
        with pytest.raises(ParameterError):
            sample_gamma(1.0, -1.0, rng())


class TestInverseGamma:
    def test_mean(self):
        draws = sample_inverse_gamma(3.0, 2.0, rng(19), size=10**6)
        assert draws.mean() == pytest.approx(1.0, rel=0.02)

    def test_cdf_relation_to_reciprocal_gamma(self):
        # IG cdf at x equals 1 - GammaCDF(1/x)
        draws = sample_inverse_gamma(2.0, 2.0, rng(20), size=10**6)
        ks = stats.kstest(draws, lambda x: stats.gamma(a=2.0, scale=0.5).sf(1.0 / x)).statistic
        assert ks < 0.01

    def test_heavy_tail_median(self):
        # shape 0.5 has no mean; check the median against the kernel CDF
        draws = sample_inverse_gamma(0.5, 1.0, rng(21), size=10**6)
        grid = log_grid(1e-10, 1e9)
        cdf = normalized_cdf(inverse_gamma_log_kernel(0.5, 1.0), grid)
        median_oracle = quantile_from_cdf(grid, cdf, 0.5)
        assert np.median(draws) == pytest.approx(median_oracle, rel=0.01)

    def test_ks_against_quadrature(self):
        grid = positive_grid(80.0)
        cdf = normalized_cdf(inverse_gamma_log_kernel(3.0, 2.0), grid)
        draws = sample_inverse_gamma(3.0, 2.0, rng(22), size=10**5)
        assert ks_distance(draws, grid, cdf) < 0.02

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            sample_inverse_gamma(-0.5, 1.0, rng())
        with pytest.raises(ParameterError):
            sample_inverse_gamma(2.0, 0.0, rng())


class TestUniform01:
    def test_mean(self):
        draws = sample_uniform01(rng(23), size=10**6)
        assert draws.mean() == pytest.approx(0.5, abs=0.002)

    def test_lower_quartile_mass(self):
        draws = sample_uniform01(rng(24), size=10**6)
        assert np.mean(draws < 0.25) == pytest.approx(0.25, abs=0.002)

    def test_fixed_stream_reproduces_first_draw(self):
        a = sample_uniform01(RngStream(42, 0))
        b = sample_uniform01(RngStream(42, 0))
        assert a == b
        assert 0.0 <= a < 1.0


class TestAldLogpdf:
    def test_center_value(self):
        assert ald_logpdf(0.0, 0.0, 1.0, 0.5) == pytest.approx(np.log(0.25), abs=1e-12)

    def test_unit_deviation(self):
        assert ald_logpdf(1.0, 0.0, 1.0, 0.5) == pytest.approx(np.log(0.25) - 0.5, abs=1e-12)

    def test_asymmetric_case(self):
        # log(0.09375) - rho_0.25(-0.5) with rho = -0.5 * (0.25 - 1) = 0.375
        expected = np.log(0.25 * 0.75 / 2.0) - 0.375
        assert ald_logpdf(-1.0, 0.0, 2.0, 0.25) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(-2.742124, abs=1e-6)

    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_integrates_to_one(self, p):
        # window scaled by each tail's decay rate: residual mass is e^{-50} per side
        mu, sigma = 0.3, 1.7
        grid = np.linspace(mu - 50.0 * sigma / (1.0 - p), mu + 50.0 * sigma / p, 2_000_001)
        dens = np.exp(ald_logpdf(grid, mu, sigma, p))
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-6)

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            ald_logpdf(0.0, 0.0, 0.0, 0.5)
        with pytest.raises(ParameterError):
            ald_logpdf(0.0, 0.0, 1.0, 1.0)


class TestMixtureRepresentation:
    @pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_negative_mass_equals_quantile_level(self, p, sigma):
        const = mixture_constants(p)
        gen = RngStream(7, int(p * 100) + int(sigma * 10)).generator
        n = 10**6
        v = gen.exponential(sigma, n)
        u = gen.standard_normal(n)
        eps = const.theta * v + const.tau * np.sqrt(sigma * v) * u
        assert np.mean(eps <= 0.0) == pytest.approx(p, abs=0.005)


class TestDeterminism:
    def test_identical_streams_identical_draws(self):
        for draw in (
            lambda r: sample_gig_half(GigHalfParams(1.5, 2.5), r, size=100),
            lambda r: sample_gamma(2.0, 3.0, r, size=100),
            lambda r: sample_inverse_gamma(2.0, 3.0, r, size=100),
            lambda r: sample_uniform01(r, size=100),
            lambda r: sample_gaussian_from_precision(
                np.array([[2.0, 0.5], [0.5, 1.0]]), np.ones(2), r, size=50
            ),
        ):
            a = draw(RngStream(99, 3))
            b = draw(RngStream(99, 3))
            assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = sample_uniform01(RngStream(99, 0), size=8)
        b = sample_uniform01(RngStream(99, 1), size=8)
        assert not np.array_equal(a, b)
