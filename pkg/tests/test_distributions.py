"""Sampler laws checked against analytic moments and exact PMFs."""

import math
from fractions import Fraction

import numpy as np
import pytest

from hpssd.distributions import (
    BLOCK_LEVELS,
    OverdispersedBinomialParams,
    ShiftedYuleParams,
    level_index,
    sample_block_level,
    sample_clique_size,
    sample_overdispersed_binomial,
    sample_poisson,
    sample_shifted_yule,
    yule_pmf,
)

N_DRAWS = 10**6


def rng_for(seed):
    return np.random.default_rng(seed)


class TestOverdispersedBinomial:
    params = OverdispersedBinomialParams(trials=9, p=0.275, rho=0.3)
    # analytic moments: mean = n p, var = n p q (1 + (n-1) rho)
    mean = 9 * 0.275
    var = 9 * 0.275 * 0.725 * (1 + 8 * 0.3)
    plain_binomial_var = 9 * 0.275 * 0.725

    def test_mean(self):
        draws = sample_overdispersed_binomial(self.params, rng_for(1), size=N_DRAWS)
        assert abs(draws.mean() - self.mean) < 0.01

    def test_mean_within_five_standard_errors(self):
        draws = sample_overdispersed_binomial(self.params, rng_for(2), size=N_DRAWS)
        se = math.sqrt(self.var / N_DRAWS)
        assert abs(draws.mean() - self.mean) < 5 * se

    def test_variance_exceeds_plain_binomial(self):
        draws = sample_overdispersed_binomial(self.params, rng_for(3), size=N_DRAWS)
        assert draws.var() > self.plain_binomial_var

    def test_degenerate_p_zero(self):
        params = OverdispersedBinomialParams(trials=9, p=0.0, rho=0.3)
        draws = sample_overdispersed_binomial(params, rng_for(4), size=1000)
        assert (draws == 0).all()
        assert sample_overdispersed_binomial(params, rng_for(4)) == 0

    def test_degenerate_p_one(self):
        params = OverdispersedBinomialParams(trials=9, p=1.0, rho=0.3)
        draws = sample_overdispersed_binomial(params, rng_for(5), size=1000)
        assert (draws == 9).all()

    def test_support(self):
        draws = sample_overdispersed_binomial(self.params, rng_for(6), size=10000)
        assert draws.min() >= 0 and draws.max() <= 9

    @pytest.mark.parametrize(
        "trials,p,rho", [(0, 0.5, 0.3), (9, -0.1, 0.3), (9, 1.1, 0.3), (9, 0.5, 0.0), (9, 0.5, 1.0)]
    )
    def test_invalid_params(self, trials, p, rho):
        with pytest.raises(ValueError):
            sample_overdispersed_binomial(
                OverdispersedBinomialParams(trials=trials, p=p, rho=rho), rng_for(7)
            )

    def test_determinism(self):
        a = sample_overdispersed_binomial(self.params, rng_for(8), size=100)
        b = sample_overdispersed_binomial(self.params, rng_for(8), size=100)
        assert (a == b).all()


class TestBlockLevel:
    def test_values_in_grid(self):
        draws = sample_block_level(0.275, rng_for(10), size=10000)
        assert set(np.unique(draws)) <= set(BLOCK_LEVELS)

    def test_affine_endpoints(self):
        # p = 0 forces count 0 -> 0.05; p = 1 forces count 9 -> 0.95
        assert sample_block_level(0.0, rng_for(11)) == 0.05
        assert sample_block_level(1.0, rng_for(11)) == 0.95

    def test_mean(self):
        # affine transform of the count mean: 0.1 * (9 * 0.275) + 0.05
        draws = sample_block_level(0.275, rng_for(12), size=N_DRAWS)
        assert abs(draws.mean() - 0.2975) < 0.005

    def test_level_index_round_trip(self):
        draws = sample_block_level(0.25, rng_for(13), size=1000)
        idx = level_index(draws)
        assert (np.array(BLOCK_LEVELS)[idx] == draws).all()


class TestYulePmf:
    def test_exact_values(self):
        # direct evaluation: lam * (lam! k!) / (lam + k + 1)!
        assert yule_pmf(0, 3.0) == pytest.approx(0.75, abs=1e-12)
        assert yule_pmf(1, 3.0) == pytest.approx(0.15, abs=1e-12)

    def test_matches_integer_arithmetic_oracle(self):
        # for lam = 3: pmf(k) = 18 / ((k+1)(k+2)(k+3)(k+4)), exact rationals
        for k in range(60):
            oracle = Fraction(18, (k + 1) * (k + 2) * (k + 3) * (k + 4))
            assert yule_pmf(k, 3.0) == pytest.approx(float(oracle), rel=1e-12)

    def test_sums_to_one(self):
        total = sum(yule_pmf(k, 3.0) for k in range(10**4 + 1))
        assert abs(total - 1.0) < 1e-6

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            yule_pmf(0, 2.0)
        with pytest.raises(ValueError):
            yule_pmf(-1, 3.0)


class TestShiftedYule:
    # moments of the shifted law: mean = 1/(lam-1), var = lam^2/((lam-1)^2 (lam-2))
    mean3 = 0.5
    var3 = 9.0 / (4.0 * 1.0)

    def test_mean(self):
        draws = sample_shifted_yule(ShiftedYuleParams(3.0), rng_for(20), size=N_DRAWS)
        assert abs(draws.mean() - self.mean3) < 0.01

    def test_mean_within_five_standard_errors(self):
        draws = sample_shifted_yule(ShiftedYuleParams(3.0), rng_for(21), size=N_DRAWS)
        se = math.sqrt(self.var3 / N_DRAWS)
        assert abs(draws.mean() - self.mean3) < 5 * se

    def test_mass_at_zero(self):
        draws = sample_shifted_yule(ShiftedYuleParams(3.0), rng_for(22), size=N_DRAWS)
        assert abs((draws == 0).mean() - 0.75) < 0.005

    def test_large_shape_degenerates(self):
        lam = 1000.0
        draws = sample_shifted_yule(ShiftedYuleParams(lam), rng_for(23), size=N_DRAWS)
        mean = lam / (lam - 1.0) - 1.0
        var = lam**2 / ((lam - 1.0) ** 2 * (lam - 2.0))
        assert abs(draws.mean() - mean) < 5 * math.sqrt(var / N_DRAWS)

    def test_matches_pmf(self):
        draws = sample_shifted_yule(ShiftedYuleParams(3.0), rng_for(24), size=N_DRAWS)
        for k in range(5):
            expected = yule_pmf(k, 3.0)
            se = math.sqrt(expected * (1 - expected) / N_DRAWS)
            assert abs((draws == k).mean() - expected) < 5 * se

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            sample_shifted_yule(ShiftedYuleParams(2.0), rng_for(25))

    def test_determinism(self):
        a = sample_shifted_yule(ShiftedYuleParams(3.0), rng_for(26), size=500)
        b = sample_shifted_yule(ShiftedYuleParams(3.0), rng_for(26), size=500)
        assert (a == b).all()

    def test_scalar_draw(self):
        value = sample_shifted_yule(ShiftedYuleParams(3.0), rng_for(27))
        assert isinstance(value, int) and value >= 0


class TestCliqueSize:
    def test_minimum_is_one(self):
        draws = sample_clique_size(rng_for(30), size=N_DRAWS)
        assert draws.min() == 1

    def test_mean(self):
        draws = sample_clique_size(rng_for(31), size=N_DRAWS)
        assert abs(draws.mean() - 2.2) < 0.01

    def test_singleton_probability(self):
        draws = sample_clique_size(rng_for(32), size=N_DRAWS)
        assert abs((draws == 1).mean() - math.exp(-1.2)) < 0.005


class TestPoisson:
    def test_zero_rate(self):
        assert sample_poisson(0.0, rng_for(40)) == 0
        assert (sample_poisson(0.0, rng_for(40), size=100) == 0).all()

    def test_mean(self):
        draws = sample_poisson(0.5, rng_for(41), size=N_DRAWS)
        assert abs(draws.mean() - 0.5) < 0.005

    def test_mass_at_zero(self):
        draws = sample_poisson(0.5, rng_for(42), size=N_DRAWS)
        assert abs((draws == 0).mean() - math.exp(-0.5)) < 0.005

    def test_negative_rate(self):
        with pytest.raises(ValueError):
            sample_poisson(-0.1, rng_for(43))
