import math

import numpy as np
import pytest

from chanest.analysis import (
    ComparisonPoint,
    ErrorReport,
    MonteCarloResult,
    channel_averaged_mse,
    equivalent_shots,
    gain_times_resource,
    mse_belldiag,
    mse_exact,
    mse_isotropic,
    mse_monte_carlo,
    mse_separable,
    mse_separable_exact,
    mse_separable_monte_carlo,
    mse_werner,
    mse_werner_quadratic,
    mse_werner_quadratic_plus_variant,
    resource_difference,
    resource_gain,
    separable_mse_coef,
    simplex_grid,
    simplex_integral_quadratic,
    werner_mse_coef,
)
from chanest.channels import (
    ChannelParams,
    GenChannelParams,
    bell_probs_belldiag,
    bell_probs_isotropic,
    bell_probs_werner,
    gen_params_from_qubit,
)
from chanest.estimation import (
    NonIdentifiableError,
    belldiag_estimator,
    isotropic_estimator,
    werner_estimator,
)
from chanest.measurement import SeedSpec
from chanest.states import BellDiagonal, werner
from conftest import random_identifiable_alpha, random_simplex_p


class TestWernerClosedForm:
    def test_unit_fidelity_reduces_to_binomial_variances(self, rng):
        params = random_simplex_p(rng)
        p = params.as_array()
        expected = float(np.sum(p * (1 - p))) / 7
        assert mse_werner(7, 1.0, params) == pytest.approx(expected, abs=1e-15)

    def test_symmetric_quarter_point(self):
        # p = (1/4, 1/4, 1/4) pins every outcome at 1/4 regardless of fidelity
        params = ChannelParams(0.25, 0.25, 0.25)
        for fidelity in (0.6, 0.8, 1.0):
            scale = (3 / (4 * fidelity - 1)) ** 2
            assert mse_werner(5, fidelity, params) == pytest.approx(scale * 9 / 16 / 5, rel=1e-14)

    def test_equals_oracle(self, rng):
        fidelity, params = 0.9, ChannelParams(0.1, 0.2, 0.3)
        probs = bell_probs_werner(fidelity, params)
        estimator = werner_estimator(fidelity)
        for n in (1, 2, 4, 6, 100):
            oracle = mse_exact(n, probs, estimator, params.as_array())
            assert abs(mse_werner(n, fidelity, params) - oracle) <= 1e-12

    def test_quarter_fidelity_raises(self):
        with pytest.raises(NonIdentifiableError):
            mse_werner(5, 0.25, ChannelParams(0.1, 0.1, 0.1))

    def test_scaling_is_one_over_n(self, rng):
        fidelity, params = 0.77, random_simplex_p(rng)
        baseline = mse_werner(1, fidelity, params)
        for n in (2, 5, 10, 100):
            assert n * mse_werner(n, fidelity, params) == pytest.approx(baseline, rel=1e-14)


class TestQuadraticExpansion:
    def test_matches_variance_form(self, rng):
        for _ in range(50):
            fidelity = rng.uniform(0.3, 1.0)
            if abs(4 * fidelity - 1) < 1e-3:
                continue
            params = random_simplex_p(rng)
            a = mse_werner(3, fidelity, params)
            b = mse_werner_quadratic(3, fidelity, params)
            assert b == pytest.approx(a, rel=1e-12, abs=1e-15)

    def test_plus_variant_disagrees_with_oracle(self):
        # pinned regression: flipping the sign of the final quadratic term
        # breaks agreement with the exact finite-shot average
        fidelity = 0.8
        params = ChannelParams(0.05, 0.05, 0.05)
        oracle = mse_exact(1, bell_probs_werner(fidelity, params), werner_estimator(fidelity), params.as_array())
        good = mse_werner_quadratic(1, fidelity, params)
        bad = mse_werner_quadratic_plus_variant(1, fidelity, params)
        assert abs(good - oracle) <= 1e-10
        assert abs(bad - oracle) > 1e-3 * oracle

    def test_variants_agree_only_at_unit_fidelity(self, rng):
        params = random_simplex_p(rng)
        assert mse_werner_quadratic_plus_variant(2, 1.0, params) == pytest.approx(
            mse_werner_quadratic(2, 1.0, params), rel=1e-14
        )


class TestSeparableClosedForm:
    def test_zero_noise(self):
        assert mse_separable(4, ChannelParams(0, 0, 0)) == 0.0

    def test_symmetric_point(self):
        assert mse_separable(6, ChannelParams(0.25, 0.25, 0.25)) == pytest.approx(9 / 16 / 6, rel=1e-14)

    def test_equals_three_binomial_oracle(self, rng):
        for _ in range(20):
            params = random_simplex_p(rng)
            for m in (1, 3, 6):
                assert abs(mse_separable(m, params) - mse_separable_exact(m, params)) <= 1e-12

    def test_monte_carlo_consistency(self, rng):
        params = ChannelParams(0.1, 0.2, 0.3)
        mc = mse_separable_monte_carlo(50, params, 20_000, SeedSpec(11, 0))
        assert abs(mc.mean - mse_separable(50, params)) <= 4 * mc.stderr


class TestBellDiagonalClosedForm:
    def test_matches_werner(self, rng):
        for _ in range(100):
            fidelity = rng.uniform(0.26, 1.0)
            if abs(4 * fidelity - 1) < 1e-2:
                continue
            params = random_simplex_p(rng)
            a = mse_belldiag(6, werner(fidelity), params)
            b = mse_werner(6, fidelity, params)
            assert a == pytest.approx(b, rel=1e-11, abs=1e-15)

    def test_pure_singlet_matches_unit_fidelity(self, rng):
        params = random_simplex_p(rng)
        p = params.as_array()
        value = mse_belldiag(9, BellDiagonal((1.0, 0.0, 0.0, 0.0)), params)
        assert value == pytest.approx(float(np.sum(p * (1 - p))) / 9, rel=1e-12, abs=1e-15)

    def test_equals_oracle(self, rng):
        for _ in range(10):
            state = random_identifiable_alpha(rng)
            params = random_simplex_p(rng)
            probs = bell_probs_belldiag(state, params)
            estimator = belldiag_estimator(state)
            for n in (1, 3, 5):
                oracle = mse_exact(n, probs, estimator, params.as_array())
                assert abs(mse_belldiag(n, state, params) - oracle) <= 1e-12

    def test_singular_state_raises(self):
        with pytest.raises(NonIdentifiableError):
            mse_belldiag(4, BellDiagonal((0.5, 0.5, 0.0, 0.0)), ChannelParams(0.1, 0.1, 0.1))


class TestIsotropicClosedForm:
    def test_lambda_one(self, rng):
        flat = rng.dirichlet(np.ones(9))
        gen = GenChannelParams(3, flat.reshape(3, 3))
        expected = float(np.sum(flat[1:] * (1 - flat[1:]))) / 4
        assert mse_isotropic(4, 3, 1.0, gen) == pytest.approx(expected, rel=1e-13)

    def test_d2_equals_werner(self, rng):
        for _ in range(100):
            fidelity = rng.uniform(0.3, 1.0)
            if abs(4 * fidelity - 1) < 1e-2:
                continue
            lam = (4 * fidelity - 1) / 3
            params = random_simplex_p(rng)
            gen = gen_params_from_qubit(params)
            assert abs(mse_isotropic(8, 2, lam, gen) - mse_werner(8, fidelity, params)) <= 1e-13

    def test_equals_oracle_d3(self, rng):
        for _ in range(5):
            flat = rng.dirichlet(np.ones(9))
            gen = GenChannelParams(3, flat.reshape(3, 3))
            lam = 0.8
            probs = bell_probs_isotropic(3, lam, gen)
            estimator = isotropic_estimator(3, lam)
            for n in (1, 2, 3):
                oracle = mse_exact(n, probs, estimator, flat[1:])
                assert abs(mse_isotropic(n, 3, lam, gen) - oracle) <= 1e-11

    def test_lambda_zero_raises(self):
        with pytest.raises(NonIdentifiableError):
            mse_isotropic(3, 3, 0.0, GenChannelParams(3, np.full((3, 3), 1 / 9)))


class TestOracle:
    def test_deterministic_channel_perfect_estimate(self):
        params = ChannelParams(1.0, 0.0, 0.0)
        probs = bell_probs_werner(1.0, params)
        assert mse_exact(1, probs, werner_estimator(1.0), params.as_array()) == 0.0

    def test_unit_fidelity_formula(self, rng):
        params = random_simplex_p(rng)
        p = params.as_array()
        probs = bell_probs_werner(1.0, params)
        for n in range(1, 7):
            oracle = mse_exact(n, probs, werner_estimator(1.0), p)
            assert abs(oracle - float(np.sum(p * (1 - p))) / n) <= 1e-13


class TestMonteCarlo:
    def test_degenerate_distribution_zero_stderr(self):
        params = ChannelParams(1.0, 0.0, 0.0)
        probs = bell_probs_werner(1.0, params)
        mc = mse_monte_carlo(5, probs, werner_estimator(1.0), params.as_array(), 100, SeedSpec(3))
        assert mc.stderr == 0.0
        assert mc.mean == 0.0

    def test_consistency_with_closed_form(self):
        fidelity, params = 0.9, ChannelParams(0.1, 0.2, 0.3)
        probs = bell_probs_werner(fidelity, params)
        mc = mse_monte_carlo(50, probs, werner_estimator(fidelity), params.as_array(), 100_000, SeedSpec(8, 1))
        assert abs(mc.mean - mse_werner(50, fidelity, params)) <= 4 * mc.stderr

    def test_doubling_shots_halves_error(self):
        fidelity, params = 0.85, ChannelParams(0.15, 0.1, 0.2)
        probs = bell_probs_werner(fidelity, params)
        estimator = werner_estimator(fidelity)
        a = mse_monte_carlo(20, probs, estimator, params.as_array(), 40_000, SeedSpec(21, 0))
        b = mse_monte_carlo(40, probs, estimator, params.as_array(), 40_000, SeedSpec(21, 1))
        sigma = math.hypot(a.stderr / 2, b.stderr)
        assert abs(a.mean / 2 - b.mean) <= 4 * sigma

    def test_trial_validation(self):
        probs = bell_probs_werner(1.0, ChannelParams(0.1, 0.1, 0.1))
        with pytest.raises(ValueError):
            mse_monte_carlo(5, probs, werner_estimator(1.0), np.zeros(3), 1, SeedSpec(0))


class TestChannelAverage:
    def test_pure_singlet_value(self):
        for n in (1, 2, 8):
            assert channel_averaged_mse(BellDiagonal((1.0, 0.0, 0.0, 0.0)), n) == pytest.approx(
                3 / (40 * n), rel=1e-14
            )

    def test_matches_simplex_integration(self, rng):
        for _ in range(20):
            state = random_identifiable_alpha(rng)
            integral = simplex_integral_quadratic(lambda q: mse_belldiag(1, state, ChannelParams(*q)))
            assert abs(channel_averaged_mse(state, 1) - integral) <= 1e-12

    def test_werner_is_the_minimum_at_fixed_singlet_weight(self):
        alpha1 = 0.7
        best = channel_averaged_mse(werner(alpha1), 1)
        rest = 1 - alpha1
        grid = np.linspace(0, rest, 41)
        for a2 in grid:
            for a3 in grid:
                a4 = rest - a2 - a3
                if a4 < 0:
                    continue
                value = channel_averaged_mse(BellDiagonal((alpha1, a2, a3, a4)), 1)
                assert value >= best - 1e-12

    def test_singular_state_raises(self):
        with pytest.raises(NonIdentifiableError):
            channel_averaged_mse(BellDiagonal((0.5, 0.5, 0.0, 0.0)), 1)


class TestSimplexIntegration:
    def test_exact_on_known_polynomial(self):
        def poly(p):
            return 2.0 + 3.0 * p[0] - p[1] * p[2] + p[0] ** 2

        expected = 2 / 6 + 3 / 24 - 1 / 120 + 1 / 60
        assert simplex_integral_quadratic(poly) == pytest.approx(expected, rel=1e-14)

    def test_volume(self):
        assert simplex_integral_quadratic(lambda p: 1.0) == pytest.approx(1 / 6, rel=1e-14)


class TestResourceComparison:
    def test_gain_requires_divisible_budget(self):
        with pytest.raises(ValueError):
            resource_gain(10, 0.9, ChannelParams(0.1, 0.1, 0.1))

    def test_gain_nonnegative_at_unit_fidelity(self):
        for p in np.linspace(0, 1 / 3, 25):
            assert resource_gain(6, 1.0, ChannelParams(p, p, p)) >= -1e-15

    def test_gain_sign_change_at_intermediate_fidelity(self):
        gains = {p: resource_gain(6, 0.9, ChannelParams(p, p, p)) for p in (0.01, 0.15, 0.32)}
        assert gains[0.01] < 0 < gains[0.15]
        assert gains[0.32] < 0

    def test_gain_negative_below_threshold(self):
        for p in np.linspace(0, 1 / 3, 50):
            assert resource_gain(6, 0.8, ChannelParams(p, p, p)) < 0

    def test_gain_times_resource_consistency(self, rng):
        for _ in range(20):
            fidelity = rng.uniform(0.5, 1.0)
            params = random_simplex_p(rng)
            coef = float(gain_times_resource(fidelity, params.as_array()))
            assert resource_gain(12, fidelity, params) == pytest.approx(coef / 12, rel=1e-12, abs=1e-15)

    def test_delta_r_positive_region(self):
        assert resource_difference(0.9, ChannelParams(0.15, 0.15, 0.15), 1.0) > 0

    def test_delta_r_negative_below_threshold(self):
        for p in np.linspace(0.01, 1 / 3, 30):
            assert resource_difference(0.7, ChannelParams(p, p, p), 1.0) < 0

    def test_delta_r_linear_in_target(self, rng):
        params = random_simplex_p(rng)
        base = resource_difference(0.9, params, 1.0)
        for eps in (0.5, 2.0, 10.0):
            assert resource_difference(0.9, params, eps) == pytest.approx(base / eps, rel=1e-14)

    def test_delta_r_degenerate_points(self):
        with pytest.raises(ValueError):
            resource_difference(0.9, ChannelParams(0, 0, 0), 1.0)
        # separable reaches zero error on a pure bit-flip channel, the noisy probe does not
        assert resource_difference(0.9, ChannelParams(1, 0, 0), 1.0) == float("-inf")
        with pytest.raises(ValueError):
            resource_difference(1.0, ChannelParams(1, 0, 0), 1.0)

    def test_gain_and_delta_r_share_sign(self, rng):
        for _ in range(50):
            fidelity = rng.uniform(0.5, 1.0)
            params = random_simplex_p(rng)
            gain = resource_gain(6, fidelity, params)
            delta = resource_difference(fidelity, params, 1.0)
            if gain != 0 and math.isfinite(delta):
                assert math.copysign(1, gain) == math.copysign(1, delta)


class TestEquivalentShots:
    def test_unit_fidelity_identity(self):
        assert equivalent_shots(1.0, 11) == pytest.approx(11.0, abs=0)

    def test_frozen_point(self):
        assert equivalent_shots(0.85, 1) == pytest.approx(1.5625, rel=1e-15)

    def test_always_at_least_n(self, rng):
        for _ in range(20):
            fidelity = rng.uniform(0.26, 1.0)
            assert equivalent_shots(fidelity, 5) >= 5.0

    def test_matching_error_through_effective_parameters(self, rng):
        # With n_tilde pairs the noisy probe reproduces, for the channel it
        # actually sees, the error a clean probe would report on the effective
        # parameter vector (the three non-singlet outcome probabilities).
        for _ in range(25):
            fidelity = rng.uniform(0.5, 1.0)
            params = random_simplex_p(rng)
            n = 3
            n_tilde = equivalent_shots(fidelity, n)
            noisy = mse_werner(n_tilde, fidelity, params)
            effective = ChannelParams(*bell_probs_werner(fidelity, params).as_array()[:3])
            clean = mse_werner(n, 1.0, effective)
            assert noisy == pytest.approx(clean, rel=1e-13)

    def test_quarter_fidelity_raises(self):
        with pytest.raises(NonIdentifiableError):
            equivalent_shots(0.25, 3)


class TestInvariants:
    def test_permutation_symmetry(self, rng):
        from itertools import permutations

        params = random_simplex_p(rng)
        p = params.as_array()
        werner_values = set()
        separable_values = set()
        for perm in permutations(range(3)):
            shuffled = ChannelParams(*p[list(perm)])
            werner_values.add(round(mse_werner(4, 0.8, shuffled), 14))
            separable_values.add(round(mse_separable(4, shuffled), 14))
        assert len(werner_values) == 1
        assert len(separable_values) == 1

    def test_dominance_over_unit_fidelity(self, rng):
        for _ in range(50):
            fidelity = rng.uniform(0.26, 0.999)
            if abs(4 * fidelity - 1) < 1e-2:
                continue
            params = random_simplex_p(rng)
            assert mse_werner(5, fidelity, params) >= mse_werner(5, 1.0, params) - 1e-15

    def test_simplex_grid(self):
        grid = simplex_grid(4)
        assert grid.shape == (35, 3)  # C(7, 3) points
        assert np.all(grid.sum(axis=1) <= 1 + 1e-12)
        assert np.all(grid >= 0)


class TestFidelitySearch:
    def test_symmetric_restriction_agrees_with_full_search(self):
        # the best channel is symmetric, so restricting the inner minimization
        # to p = (p, p, p) must land on the same threshold fidelity
        from chanest.analysis import min_useful_fidelity

        tolerance = 2e-4
        full, _ = min_useful_fidelity(tolerance)

        ps = np.linspace(0.0, 1.0 / 3.0, 2000)
        grid = np.stack([ps, ps, ps], axis=-1)
        lo, hi = 0.5 + 1e-9, 1.0
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            deficit = 2.0 * werner_mse_coef(mid, grid) - 3.0 * separable_mse_coef(grid)
            if deficit.min() <= 0.0:
                hi = mid
            else:
                lo = mid
        assert abs(hi - full) <= 2 * tolerance


class TestReportTypes:
    def test_error_report_holds_fields(self):
        report = ErrorReport("werner", 0.5, oracle=0.5, monte_carlo=MonteCarloResult(0.49, 0.01, 100))
        assert report.scheme == "werner"
        assert report.monte_carlo.trials == 100

    def test_comparison_point(self):
        point = ComparisonPoint(0.9, ChannelParams(0.1, 0.1, 0.1), 0.02, 3.4, 1.0)
        assert point.fidelity == 0.9
        assert point.delta_resources == pytest.approx(3.4)
