"""Tests for synthetic data models and excess-risk evaluation."""

import numpy as np
import pytest

from kernelrisk.data import (
    ContaminatedNoise,
    DataModel,
    TruncatedGaussianNoise,
    UniformNoise,
    excess_l2_risk,
    excess_power_risk,
    generate,
    trial_seed,
)
from kernelrisk.kernels import Box, Kernel, KernelExpansion, combine_expansions

BOX = Box((0.0,), (1.0,))
KERN = Kernel("matern", BOX, sobolev_order=1.0, length_scale=0.25)
GAUSS = Kernel("gaussian", BOX, width=0.3)


def make_fstar(kernel=KERN, norm=0.5):
    centers = np.linspace(0.1, 0.9, 5).reshape(-1, 1)
    coefs = np.array([0.8, -0.5, 0.9, -0.4, 0.6])
    f0 = KernelExpansion(kernel, centers, coefs)
    return KernelExpansion(kernel, centers, coefs * (norm / f0.rkhs_norm()))


def make_model(noise=None, kernel=KERN):
    return DataModel(make_fstar(kernel), noise or UniformNoise(0.5))


class TestNoise:
    def test_uniform_bound_and_symmetry(self):
        noise = UniformNoise(0.4)
        assert noise.bound == 0.4
        assert noise.symmetric
        rng = np.random.default_rng(0)
        vals = noise.sample(rng, 20_000)
        assert np.max(np.abs(vals)) <= 0.4
        assert abs(vals.mean()) < 0.01

    def test_truncated_gaussian_respects_bound(self):
        noise = TruncatedGaussianNoise(sigma=0.5, half_width=0.3)
        vals = noise.sample(np.random.default_rng(1), 50_000)
        assert np.max(np.abs(vals)) <= 0.3
        assert abs(vals.mean()) < 0.01

    def test_contaminated_symmetric_outliers(self):
        noise = ContaminatedNoise(UniformNoise(0.2), 0.3, 0.5)
        assert noise.bound == 0.5
        assert noise.symmetric
        vals = noise.sample(np.random.default_rng(2), 100_000)
        frac = np.mean(np.abs(vals) == 0.5)
        assert frac == pytest.approx(0.3, abs=0.01)
        assert abs(vals.mean()) < 0.01

    def test_contaminated_zero_fraction_matches_base(self):
        base = UniformNoise(0.25)
        noise = ContaminatedNoise(base, 0.0, 0.6)
        a = noise.sample(np.random.default_rng(3), 1000)
        b = base.sample(np.random.default_rng(3), 1000)
        np.testing.assert_array_equal(a, b)

    def test_asymmetric_flagged(self):
        noise = ContaminatedNoise(UniformNoise(0.2), 0.2, 0.5, asymmetric=True)
        assert not noise.symmetric
        vals = noise.sample(np.random.default_rng(4), 50_000)
        assert vals.mean() > 0.05


class TestDataModel:
    def test_range_guard(self):
        with pytest.raises(ValueError):
            DataModel(make_fstar(norm=0.7), UniformNoise(0.5))
        DataModel(make_fstar(norm=0.5), UniformNoise(0.5))  # exactly 1: fine

    def test_symmetry_flag(self):
        assert make_model().symmetric
        noisy = ContaminatedNoise(UniformNoise(0.2), 0.1, 0.4, asymmetric=True)
        assert not make_model(noise=noisy).symmetric


class TestGenerate:
    def test_zero_noise_reproduces_truth(self):
        model = make_model(noise=UniformNoise(0.0))
        train = generate(model, 50, 7)
        np.testing.assert_allclose(train.ys, model.f_star(train.xs),
                                   atol=1e-12)

    def test_deterministic_given_seed(self):
        model = make_model()
        a = generate(model, 64, trial_seed(5, 3))
        b = generate(model, 64, trial_seed(5, 3))
        np.testing.assert_array_equal(a.xs, b.xs)
        np.testing.assert_array_equal(a.ys, b.ys)
        c = generate(model, 64, trial_seed(5, 4))
        assert not np.array_equal(a.ys, c.ys)

    def test_responses_in_range_and_inputs_in_box(self):
        model = make_model(noise=TruncatedGaussianNoise(0.4, 0.5))
        train = generate(model, 5000, 11)
        assert np.max(np.abs(train.ys)) <= 1.0
        assert np.all((train.xs >= 0.0) & (train.xs <= 1.0))


class TestExcessRisks:
    def test_truth_has_zero_excess(self):
        model = make_model()
        assert excess_l2_risk(model, model.f_star) == pytest.approx(0.0,
                                                                    abs=1e-15)

    def test_constant_shift_excess(self):
        model = make_model(noise=UniformNoise(0.3))
        for c in (0.05, -0.12):
            shifted = lambda pts, c=c: model.f_star(pts) + c
            assert excess_l2_risk(model, shifted) == pytest.approx(
                c * c, rel=1e-9)

    def test_quadrature_matches_monte_carlo_oracle(self):
        for kernel in (KERN, GAUSS):
            model = make_model(kernel=kernel)
            zero = lambda pts: np.zeros(len(pts))
            quad = excess_l2_risk(model, zero)
            rng = np.random.default_rng(12)
            xs = rng.uniform(0, 1, size=(1_000_000, 1))
            mc = float(np.mean(model.f_star(xs) ** 2))
            se = float(np.std(model.f_star(xs) ** 2) / 1000.0)
            assert quad == pytest.approx(mc, abs=3 * se)

    def test_quadrature_tolerance_on_expansions(self):
        # against a dense-grid trapezoid oracle at 2e6 points
        model = make_model()
        rng = np.random.default_rng(13)
        f = KernelExpansion(KERN, rng.uniform(0, 1, (40, 1)),
                            0.2 * rng.standard_normal(40))
        quad = excess_l2_risk(model, f)
        grid = np.linspace(0, 1, 2_000_001).reshape(-1, 1)
        vals = (f(grid) - model.f_star(grid)) ** 2
        oracle = float(np.trapezoid(vals.ravel(), dx=1 / 2_000_000))
        assert quad == pytest.approx(oracle, abs=1e-6)

    def test_excess_power_zero_at_truth(self):
        model = make_model()
        est, se = excess_power_risk(model, model.f_star, 1.5, 20_000, 3)
        assert abs(est) <= max(3 * se, 1e-12)

    def test_excess_power_alpha2_matches_quadrature(self):
        model = make_model()
        f = lambda pts: model.f_star(pts) + 0.1
        quad = excess_l2_risk(model, f)
        est, se = excess_power_risk(model, f, 2.0, 300_000, 4)
        assert est == pytest.approx(quad, abs=3 * se)

    def test_excess_power_nonnegative_within_noise(self):
        model = make_model()
        rng = np.random.default_rng(5)
        for alpha in (1.25, 1.75):
            f = KernelExpansion(KERN, rng.uniform(0, 1, (4, 1)),
                                0.3 * rng.standard_normal(4))
            est, se = excess_power_risk(model, f, alpha, 50_000, 6)
            assert est >= -3 * se

    def test_asymmetric_model_rejected(self):
        noisy = ContaminatedNoise(UniformNoise(0.2), 0.1, 0.4, asymmetric=True)
        model = make_model(noise=noisy)
        with pytest.raises(ValueError):
            excess_power_risk(model, model.f_star, 1.5, 1000, 0)

    def test_excess_positive_off_the_truth(self):
        # zero exactly at f*, strictly positive for any visible deviation
        model = make_model()
        rng = np.random.default_rng(14)
        for _ in range(5):
            bump = KernelExpansion(KERN, rng.uniform(0, 1, (2, 1)),
                                   0.05 * rng.standard_normal(2))
            f = combine_expansions(model.f_star, bump)
            if bump.rkhs_norm() < 1e-6:
                continue
            assert excess_l2_risk(model, f) > 0.0

    def test_difference_of_expansions_path(self):
        # expansion f measured against expansion truth, same kernel
        model = make_model()
        bump = KernelExpansion(KERN, [[0.5]], [0.1])
        f = combine_expansions(model.f_star, bump)
        direct = excess_l2_risk(model, f)
        assert direct == pytest.approx(excess_l2_risk(model, lambda p: f(p)),
                                       rel=1e-10)
