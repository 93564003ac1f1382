"""
test_dpmtp.py - Tests for the Dirichlet-process MTP

Changes:
- Initial implementation
- PrSig checked on the case-study family
- Prior centering at m = 2, 10, 41 and the mass variance
"""

import unittest

import numpy as np
from scipy import special

from modules.cli.casestudy import NEEDLEMAN_ROWS, observed_pvalues
from modules.core.errors import DimensionMismatch, DomainError
from modules.core.rng import RngStream
from modules.procedures.dpmtp import (
    dp_baseline,
    dp_prsig,
    dp_shape,
    dp_shapes,
    dp_thresholds,
    sample_dp_draw,
    sample_dp_masses,
)
from modules.procedures.mtp import PValueFamily, by_shape, harmonic_number


class BaselineTests(unittest.TestCase):
    def test_by_baseline(self):
        """Test the BY-shaped base measure."""
        baseline = dp_baseline(41)
        self.assertAlmostEqual(float(baseline.nu0.sum()), 1.0, places=12)
        self.assertAlmostEqual(baseline.nu0[0], 1.0 / harmonic_number(41), places=12)
        self.assertAlmostEqual(baseline.nu0[0] / baseline.nu0[1], 2.0, places=12)

    def test_invalid(self):
        """Test baseline dimension validation."""
        with self.assertRaises(DomainError):
            dp_baseline(0)


class DrawTests(unittest.TestCase):
    """Random measures and their shape functions."""

    def setUp(self):
        """Set up the random stream."""
        self.gen = RngStream(20260101, 0, (44,)).generator()

    def test_masses(self):
        """Test shapes and sums of sampled masses."""
        mass, masses = sample_dp_masses(dp_baseline(6), 1.0, 500, self.gen)
        self.assertEqual(mass.shape, (500,))
        self.assertEqual(masses.shape, (500, 6))
        self.assertTrue(np.all(mass > 0))
        np.testing.assert_allclose(masses.sum(axis=1), 1.0, atol=1e-12)

    def test_prior_centered_on_by(self):
        """Test that the mean DP shape matches the BY shape within 3 standard errors."""
        for m in (2, 10, 41):
            _, masses = sample_dp_masses(dp_baseline(m), 1.0, 100000, self.gen)
            shapes = dp_shapes(masses)
            stderr = shapes.std(axis=0, ddof=1) / np.sqrt(shapes.shape[0])
            gap = np.abs(shapes.mean(axis=0) - by_shape(m))
            self.assertTrue(np.all(gap <= 3.0 * stderr + 1e-12), msg=f"m={m}")

    def test_mass_variance(self):
        """Test Var[nu(r)] = nu0(r) (1 - nu0(r)) E[1 / (M + 1)] with M ~ Exp(1)."""
        baseline = dp_baseline(10)
        _, masses = sample_dp_masses(baseline, 1.0, 100000, self.gen)
        inverse_mean = np.e * special.exp1(1.0)
        expected = baseline.nu0 * (1.0 - baseline.nu0) * inverse_mean
        np.testing.assert_allclose(masses[:, :2].var(axis=0), expected[:2], rtol=0.05)

    def test_single_draw(self):
        """Test one random measure and its shape function."""
        draw = sample_dp_draw(dp_baseline(4), 1.0, RngStream(3))
        self.assertEqual(draw.m, 4)
        self.assertGreater(draw.mass, 0.0)
        self.assertAlmostEqual(dp_shape(draw, 4), float(np.dot(np.arange(1, 5), draw.masses)))
        with self.assertRaises(DomainError):
            dp_shape(draw, 5)
        with self.assertRaises(DomainError):
            dp_shape(draw, 0)

    def test_thresholds(self):
        """Test DP thresholds from one draw."""
        draw = sample_dp_draw(dp_baseline(4), 1.0, RngStream(3))
        thresholds = dp_thresholds(draw, 0.05)
        self.assertTrue(thresholds.is_nondecreasing)
        self.assertFalse(thresholds.clamped)
        np.testing.assert_allclose(thresholds.deltas, 0.05 / 4 * dp_shapes(draw.masses))
        with self.assertRaises(DimensionMismatch):
            dp_thresholds(draw, 0.05, weights=[0.5, 0.5])

    def test_rate_domain(self):
        """Test hyperprior rate validation."""
        with self.assertRaises(DomainError):
            sample_dp_masses(dp_baseline(3), 0.0, 10, self.gen)


class PrSigTests(unittest.TestCase):
    """Prior predictive significance probabilities."""

    def setUp(self):
        """Set up the case-study family."""
        ids = [row[0] for row in NEEDLEMAN_ROWS]
        self.family = PValueFamily(observed_pvalues(), ids=ids)
        self.ids = ids

    def test_single_zero_pvalue(self):
        """Test that a zero p-value is always significant."""
        prsig = dp_prsig(PValueFamily([0.0]), 0.05, 200, rng=RngStream(1))
        np.testing.assert_array_equal(prsig.by_test(), [1.0])

    def test_single_draw_is_binary(self):
        """Test that one draw gives 0/1 significance."""
        values = dp_prsig(self.family, 0.05, 1, rng=RngStream(2)).values
        self.assertTrue(set(np.unique(values)).issubset({0.0, 1.0}))

    def test_nonincreasing_in_rank(self):
        """Test that significance falls with rank."""
        prsig = dp_prsig(self.family, 0.05, 500, rng=RngStream(4))
        self.assertTrue(np.all(np.diff(prsig.values) <= 0))
        self.assertEqual(prsig.n_draws, 500)

    def test_case_study_values(self):
        """Test PrSig on the case-study family."""
        prsig = dp_prsig(self.family, 0.05, 1000, rng=RngStream(20260101)).by_test()
        by_id = dict(zip(self.ids, prsig))
        self.assertAlmostEqual(by_id[39], 0.57, delta=0.05)
        self.assertEqual(by_id[39], by_id[40])
        self.assertAlmostEqual(by_id[1], 0.28, delta=0.05)
        self.assertAlmostEqual(by_id[2], 0.0, delta=0.05)

    def test_equal_weights_match_unweighted(self):
        """Test that equal weights match the unweighted procedure."""
        first = dp_prsig(self.family, 0.05, 300, rng=RngStream(8)).values
        second = dp_prsig(self.family, 0.05, 300, rng=RngStream(8), weighted=True).values
        np.testing.assert_allclose(first, second)

    def test_shared_masses(self):
        """Test reuse of shared masses."""
        _, masses = sample_dp_masses(dp_baseline(41), 1.0, 300, RngStream(9).generator())
        first = dp_prsig(self.family, 0.05, 300, masses=masses).values
        second = dp_prsig(self.family, 0.05, 300, masses=masses).values
        np.testing.assert_array_equal(first, second)
        with self.assertRaises(DimensionMismatch):
            dp_prsig(PValueFamily([0.01, 0.02]), 0.05, 300, masses=masses)

    def test_per_rank_variant(self):
        """Test the per-rank variant."""
        prsig = dp_prsig(self.family, 0.05, 300, rng=RngStream(5), per_rank=True)
        self.assertTrue(np.all((prsig.values >= 0) & (prsig.values <= 1)))

    def test_domain(self):
        """Test alpha and draw-count validation."""
        with self.assertRaises(DomainError):
            dp_prsig(self.family, 1.0, 10, rng=RngStream(1))
        with self.assertRaises(DomainError):
            dp_prsig(self.family, 0.05, 0, rng=RngStream(1))


if __name__ == '__main__':
    unittest.main()
