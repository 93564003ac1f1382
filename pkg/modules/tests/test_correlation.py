"""
test_correlation.py - Tests for Cholesky factors and correlation sampling

Changes:
- Initial implementation
- Off-diagonal marginals checked against 2 * Beta(m/2, m/2) - 1
- Marginals for m = 2, 3 and 5, exchangeability, and the pivot floor
"""

import unittest

import numpy as np
from scipy import stats

from modules.core.correlation import (
    CholeskyFactor,
    CorrelationMatrix,
    FixedCorrelationSampler,
    UniformCorrelationSampler,
    cholesky,
    sample_uniform_correlation,
    uniform_cholesky_lower,
)
from modules.core.errors import DimensionMismatch, DomainError, NotPositiveDefinite
from modules.core.rng import RngStream


class CholeskyTests(unittest.TestCase):
    def test_two_by_two(self):
        """Test a 2x2 factorization."""
        factor = cholesky(np.array([[1.0, 0.5], [0.5, 1.0]]))
        np.testing.assert_allclose(factor.lower, [[1.0, 0.0], [0.5, np.sqrt(0.75)]], atol=1e-15)
        np.testing.assert_allclose(factor.reconstruct(), [[1.0, 0.5], [0.5, 1.0]], atol=1e-15)

    def test_identity(self):
        """Test the identity factor."""
        factor = cholesky(np.eye(4))
        np.testing.assert_array_equal(factor.lower, np.eye(4))

    def test_matches_numpy(self):
        """Test agreement with numpy.linalg.cholesky on a sampled correlation matrix."""
        entries = sample_uniform_correlation(6, RngStream(12)).entries
        np.testing.assert_allclose(cholesky(entries).lower, np.linalg.cholesky(entries), atol=1e-14)

    def test_pivot_below_floor(self):
        """Test that a factorable matrix whose pivot is below the floor is rejected."""
        rho = 1.0 - 1e-14
        with self.assertRaises(NotPositiveDefinite) as ctx:
            cholesky(np.array([[1.0, rho], [rho, 1.0]]))
        self.assertEqual(ctx.exception.pivot_index, 1)
        self.assertLessEqual(ctx.exception.pivot_value, 1e-12)

    def test_singular_matrix(self):
        """Test that a singular matrix reports its failing pivot."""
        with self.assertRaises(NotPositiveDefinite) as ctx:
            cholesky(np.ones((3, 3)))
        self.assertEqual(ctx.exception.pivot_index, 1)

    def test_asymmetric(self):
        """Test rejection of an asymmetric matrix."""
        with self.assertRaises(DomainError):
            cholesky(np.array([[1.0, 0.2], [0.3, 1.0]]))

    def test_factor_validation(self):
        """Test CholeskyFactor validation."""
        with self.assertRaises(DomainError):
            CholeskyFactor(np.array([[1.0, 0.1], [0.0, 1.0]]))
        with self.assertRaises(DomainError):
            CholeskyFactor(np.array([[1.0, 0.0], [0.5, 0.0]]))


class CorrelationMatrixTests(unittest.TestCase):
    def test_valid(self):
        """Test a valid correlation matrix."""
        matrix = CorrelationMatrix([[1.0, 0.3, 0.1], [0.3, 1.0, -0.2], [0.1, -0.2, 1.0]])
        self.assertEqual(matrix.dim, 3)
        np.testing.assert_allclose(matrix.off_diagonal(), [0.3, 0.1, -0.2])
        np.testing.assert_allclose(matrix.factor.reconstruct(), matrix.entries, atol=1e-14)

    def test_rejects_non_unit_diagonal(self):
        """Test rejection of a non-unit diagonal."""
        with self.assertRaises(DomainError):
            CorrelationMatrix([[2.0, 0.0], [0.0, 1.0]])

    def test_rejects_non_square(self):
        """Test rejection of a non-square matrix."""
        with self.assertRaises(DimensionMismatch):
            CorrelationMatrix(np.ones((2, 3)))

    def test_rejects_indefinite(self):
        """Test rejection of an indefinite matrix."""
        with self.assertRaises(NotPositiveDefinite):
            CorrelationMatrix([[1.0, 0.9, 0.9], [0.9, 1.0, -0.9], [0.9, -0.9, 1.0]])


class UniformSamplerTests(unittest.TestCase):
    """LKJ(1) draws."""

    def setUp(self):
        """Set up the random stream."""
        self.gen = RngStream(20260101, 0, (77,)).generator()

    def test_structure(self):
        """Test symmetry, unit diagonal and positive definiteness of a draw."""
        matrix = sample_uniform_correlation(6, self.gen)
        np.testing.assert_allclose(matrix.entries, matrix.entries.T)
        np.testing.assert_allclose(np.diag(matrix.entries), 1.0)
        self.assertTrue(np.all(np.linalg.eigvalsh(matrix.entries) > 0))

    def test_rows_have_unit_norm(self):
        """Test that factor rows have unit norm."""
        lower = uniform_cholesky_lower(10, self.gen)
        np.testing.assert_allclose(np.sum(lower * lower, axis=1), 1.0, atol=1e-12)
        self.assertTrue(np.all(np.diag(lower) > 0))
        np.testing.assert_array_equal(np.triu(lower, k=1), 0.0)

    def test_dimension_one(self):
        """Test the 1x1 case."""
        sampler = UniformCorrelationSampler(1)
        np.testing.assert_array_equal(sampler.sample_lower(self.gen), [[1.0]])

    def draw_entries(self, m, n):
        lowers = [uniform_cholesky_lower(m, self.gen) for _ in range(n)]
        return np.array([lower @ lower.T for lower in lowers])

    def test_off_diagonal_marginals(self):
        """Test that each off-diagonal entry is 2 * Beta(m/2, m/2) - 1 for m = 2, 3, 5."""
        for m in (2, 3, 5):
            entries = self.draw_entries(m, 20000)
            reference = stats.beta(m / 2.0, m / 2.0).cdf
            for i, j in ((1, 0), (m - 1, 0), (m - 1, m - 2)):
                result = stats.kstest((entries[:, i, j] + 1.0) / 2.0, reference)
                self.assertGreater(result.pvalue, 0.001, msg=f"m={m} entry ({i}, {j})")

    def test_entries_are_exchangeable(self):
        """Test that the first and last off-diagonal entries share one law."""
        entries = self.draw_entries(5, 20000)
        result = stats.ks_2samp(entries[:, 1, 0], entries[:, 4, 2])
        self.assertGreater(result.pvalue, 0.001)

    def test_reproducible(self):
        """Test that equal seeds give equal draws."""
        first = sample_uniform_correlation(5, RngStream(3)).entries
        second = sample_uniform_correlation(5, RngStream(3)).entries
        np.testing.assert_array_equal(first, second)

    def test_invalid_dimension(self):
        """Test sampler dimension validation."""
        with self.assertRaises(DomainError):
            UniformCorrelationSampler(0)
        self.assertEqual(UniformCorrelationSampler(3).describe(), "uniform")


class FixedSamplerTests(unittest.TestCase):
    def test_point_mass(self):
        """Test the fixed correlation sampler."""
        entries = [[1.0, 0.4], [0.4, 1.0]]
        sampler = FixedCorrelationSampler(entries)
        gen = RngStream(1).generator()
        first = sampler.sample_lower(gen)
        second = sampler.sample_lower(gen)
        np.testing.assert_array_equal(first, second)
        np.testing.assert_allclose(first @ first.T, entries, atol=1e-15)
        self.assertEqual(sampler.describe(), "fixed")
        self.assertEqual(sampler.dim, 2)


if __name__ == '__main__':
    unittest.main()
