"""
test_special.py - Tests for special functions and scalar samplers

Changes:
- Initial implementation against scipy.stats reference values
- Distributional checks use fixed seeds and Kolmogorov-Smirnov tests
"""

import math
import unittest

import numpy as np
from scipy import stats

from modules.core.errors import DomainError
from modules.core.rng import RngStream
from modules.core.special import (
    CHI_SQUARE_INFINITE,
    chi_square_divisors,
    exponential_quantile,
    regularized_incomplete_beta,
    sample_chi_square,
    sample_dirichlet,
    sample_exponential,
    sample_gamma,
    std_normal_cdf,
    std_normal_quantile,
    student_t_cdf,
    student_t_quantile,
)
from modules.core.types import INFINITE, DegreesOfFreedom


class NormalTests(unittest.TestCase):
    """Standard normal CDF and quantile."""

    def test_cdf_values(self):
        """Test normal CDF values."""
        self.assertAlmostEqual(std_normal_cdf(0.0), 0.5, places=15)
        self.assertAlmostEqual(std_normal_cdf(1.959963984540054), 0.975, places=12)
        self.assertAlmostEqual(std_normal_cdf(-8.0), stats.norm.cdf(-8.0), delta=1e-25)

    def test_quantile_values(self):
        """Test normal quantile values."""
        self.assertAlmostEqual(std_normal_quantile(0.975), 1.959963984540054, places=12)
        self.assertAlmostEqual(std_normal_quantile(0.5), 0.0, places=15)

    def test_quantile_domain(self):
        """Test normal quantile validation."""
        for p in (0.0, 1.0, -0.1, 1.5):
            with self.assertRaises(DomainError):
                std_normal_quantile(p)

    def test_vectorized(self):
        """Test the vectorized normal CDF."""
        x = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(std_normal_cdf(x), stats.norm.cdf(x), rtol=1e-14)


class IncompleteBetaTests(unittest.TestCase):
    def test_matches_beta_cdf(self):
        """Test against the beta CDF."""
        for a, b, x in ((2.0, 3.0, 0.4), (0.5, 0.5, 0.1), (10.0, 1.5, 0.9)):
            self.assertAlmostEqual(regularized_incomplete_beta(a, b, x), stats.beta.cdf(x, a, b), places=12)

    def test_endpoints(self):
        """Test the endpoints."""
        self.assertEqual(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0)
        self.assertEqual(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0)

    def test_domain(self):
        """Test argument validation."""
        with self.assertRaises(DomainError):
            regularized_incomplete_beta(0.0, 1.0, 0.5)
        with self.assertRaises(DomainError):
            regularized_incomplete_beta(1.0, 1.0, 1.5)


class StudentTTests(unittest.TestCase):
    """Student-t CDF and quantile, including the INFINITE limit."""

    def test_cdf_matches_scipy(self):
        """Test the t CDF against scipy."""
        for nu in (1.0, 4.5, 151.0):
            for x in (-3.0, -0.2, 0.0, 1.7):
                self.assertAlmostEqual(student_t_cdf(x, DegreesOfFreedom(nu)), stats.t.cdf(x, nu), places=12)

    def test_infinite_is_normal(self):
        """Test the infinite dof limit."""
        self.assertAlmostEqual(student_t_cdf(1.3, INFINITE), stats.norm.cdf(1.3), places=15)
        self.assertAlmostEqual(student_t_quantile(0.975, INFINITE), 1.959963984540054, places=12)

    def test_quantile_round_trip(self):
        """Test t quantile round trips."""
        dof = DegreesOfFreedom(151)
        for p in (1e-6, 0.0005, 0.025, 0.3, 0.5, 0.9):
            x = student_t_quantile(p, dof)
            self.assertAlmostEqual(student_t_cdf(x, dof), p, delta=1e-12 + 1e-10 * p)

    def test_large_dof_approaches_normal(self):
        """Test that a million degrees of freedom is within 1e-4 of the normal CDF."""
        x = np.linspace(-5.0, 5.0, 1001)
        gap = np.abs(student_t_cdf(x, DegreesOfFreedom(1e6)) - std_normal_cdf(x))
        self.assertLess(float(gap.max()), 1e-4)

    def test_random_quantile_round_trip(self):
        """Test cdf(quantile(p)) = p on a thousand random probabilities per dof."""
        gen = RngStream(20260101, 0, (98,)).generator()
        p = gen.uniform(1e-6, 1.0 - 1e-6, size=1000)
        for nu in (1.0, 5.0, 151.0):
            dof = DegreesOfFreedom(nu)
            np.testing.assert_allclose(student_t_cdf(student_t_quantile(p, dof), dof), p, rtol=0.0, atol=1e-9,
                                       err_msg=f"nu={nu}")

    def test_quantile_domain(self):
        """Test t quantile validation."""
        with self.assertRaises(DomainError):
            student_t_quantile(0.0, DegreesOfFreedom(10))
        with self.assertRaises(DomainError):
            student_t_quantile(1.0, DegreesOfFreedom(10))


class SamplerTests(unittest.TestCase):
    """Gamma, chi-square, Dirichlet and exponential draws."""

    def setUp(self):
        """Set up the random stream."""
        self.gen = RngStream(20260101, 0, (99,)).generator()

    def test_gamma_small_shape_distribution(self):
        """Test gamma draws with shape below one."""
        draws = sample_gamma(0.3, self.gen, size=4000)
        self.assertTrue(np.all(draws >= 0))
        result = stats.kstest(draws, stats.gamma(a=0.3).cdf)
        self.assertGreater(result.pvalue, 0.001)

    def test_gamma_large_shape_mean(self):
        """Test the gamma mean for a large shape."""
        draws = sample_gamma(5.0, self.gen, size=20000)
        self.assertAlmostEqual(float(np.mean(draws)), 5.0, delta=0.1)

    def test_gamma_domain(self):
        """Test gamma shape validation."""
        with self.assertRaises(DomainError):
            sample_gamma(0.0, self.gen)

    def test_gamma_reproducible(self):
        """Test that gamma draws are reproducible."""
        first = sample_gamma(2.0, RngStream(5), size=10)
        second = sample_gamma(2.0, RngStream(5), size=10)
        np.testing.assert_array_equal(first, second)

    def test_chi_square(self):
        """Test chi-square draws."""
        self.assertEqual(sample_chi_square(INFINITE, self.gen), CHI_SQUARE_INFINITE)
        draws = np.array([sample_chi_square(DegreesOfFreedom(7), self.gen) for _ in range(3000)])
        self.assertGreater(stats.kstest(draws, stats.chi2(7).cdf).pvalue, 0.001)

    def test_chi_square_divisors(self):
        """Test chi-square divisors."""
        divisors = chi_square_divisors(np.array([math.inf, 20.0, math.inf]), self.gen, size=50)
        self.assertEqual(divisors.shape, (50, 3))
        np.testing.assert_array_equal(divisors[:, 0], 1.0)
        np.testing.assert_array_equal(divisors[:, 2], 1.0)
        self.assertTrue(np.all(divisors[:, 1] > 0))

    def test_dirichlet_sums_to_one(self):
        """Test that Dirichlet draws sum to one."""
        draws = sample_dirichlet(np.full(41, 1.0 / 41), self.gen, size=200)
        self.assertEqual(draws.shape, (200, 41))
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)
        self.assertTrue(np.all(np.isfinite(draws)))

    def test_dirichlet_tiny_concentrations(self):
        """Test Dirichlet draws with tiny concentrations."""
        draws = sample_dirichlet(np.full(5, 1e-4), self.gen, size=100)
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)
        self.assertTrue(np.all(draws >= 0))

    def test_dirichlet_marginal(self):
        """Test a Dirichlet marginal."""
        draws = sample_dirichlet(np.array([2.0, 3.0, 5.0]), self.gen, size=3000)
        self.assertGreater(stats.kstest(draws[:, 0], stats.beta(2.0, 8.0).cdf).pvalue, 0.001)

    def test_dirichlet_domain(self):
        """Test Dirichlet validation."""
        with self.assertRaises(DomainError):
            sample_dirichlet(np.array([1.0, 0.0]), self.gen)

    def test_exponential(self):
        """Test exponential draws."""
        draws = sample_exponential(2.0, self.gen, size=20000)
        self.assertAlmostEqual(float(np.mean(draws)), 0.5, delta=0.02)
        with self.assertRaises(DomainError):
            sample_exponential(0.0, self.gen)

    def test_exponential_quantile(self):
        """Test the exponential quantile."""
        self.assertAlmostEqual(exponential_quantile(1.0 - math.exp(-1.0)), 1.0, places=12)
        self.assertAlmostEqual(exponential_quantile(0.5, rate=2.0), math.log(2.0) / 2.0, places=12)


if __name__ == '__main__':
    unittest.main()
