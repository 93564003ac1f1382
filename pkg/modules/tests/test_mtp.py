"""
test_mtp.py - Tests for Bonferroni, Holm and Benjamini-Yekutieli

Changes:
- Initial implementation
- Reject sets on the 41 case-study p-values
- Weighted thresholds, clamping and zero tail weights
- Random-family invariants and null error rates
"""

import unittest

import numpy as np

from modules.cli.casestudy import NEEDLEMAN_ROWS, observed_pvalues
from modules.core.errors import DimensionMismatch, DomainError, ZeroTailWeight
from modules.core.mvdist import TAIL_CODES, StudentTNull
from modules.core.rng import RngStream
from modules.core.types import INFINITE, TailType
from modules.procedures.mtp import (
    MethodSpec,
    MtpKind,
    PValueFamily,
    apply_single_step,
    apply_step_down,
    apply_step_up,
    classical_rejections,
    harmonic_number,
    parse_methods,
    run_mtp,
    sort_family,
    step_down_counts,
    step_up_counts,
    thresholds_bonferroni,
    thresholds_by,
    thresholds_holm,
)


class MethodSpecTests(unittest.TestCase):
    def test_parse(self):
        """Test method parsing."""
        method = MethodSpec.parse("by:weighted")
        self.assertIs(method.kind, MtpKind.BY)
        self.assertTrue(method.weighted)
        self.assertEqual(method.label, "BY.w")
        self.assertEqual(method.key, "by:weighted")
        self.assertEqual(MethodSpec.parse("H").label, "H")
        self.assertEqual(MethodSpec.parse("dp:w").unweighted(), MethodSpec.parse("dp"))

    def test_unknown(self):
        """Test rejection of unknown methods."""
        with self.assertRaises(DomainError):
            MethodSpec.parse("bh")
        with self.assertRaises(DomainError):
            MethodSpec.parse("b:fast")

    def test_parse_methods_deduplicates(self):
        """Test that repeated methods are dropped."""
        methods = parse_methods(["b", "h", "B", "by:w", "by:weighted"])
        self.assertEqual([m.label for m in methods], ["B", "H", "BY.w"])


class FamilyTests(unittest.TestCase):
    def test_defaults(self):
        """Test default ids and weights."""
        family = PValueFamily([0.2, 0.01, 0.5])
        self.assertEqual(family.ids, [1, 2, 3])
        np.testing.assert_allclose(family.weights, 1.0 / 3.0)

    def test_invalid(self):
        """Test family validation."""
        with self.assertRaises(DomainError):
            PValueFamily([])
        with self.assertRaises(DomainError):
            PValueFamily([0.1, 1.2])
        with self.assertRaises(DomainError):
            PValueFamily([0.1, 0.2], weights=[0.5, 0.6])
        with self.assertRaises(DimensionMismatch):
            PValueFamily([0.1, 0.2], weights=[1.0])

    def test_stable_sort(self):
        """Test that ties keep their input order."""
        family = PValueFamily([0.3, 0.01, 0.01, 0.2])
        sorted_family = sort_family(family)
        np.testing.assert_array_equal(sorted_family.permutation, [1, 2, 3, 0])
        np.testing.assert_allclose(sorted_family.values, [0.01, 0.01, 0.2, 0.3])


class ThresholdTests(unittest.TestCase):
    """Threshold vectors on the 41-test family."""

    def setUp(self):
        """Set up a small family."""
        self.family = PValueFamily(observed_pvalues(), ids=[row[0] for row in NEEDLEMAN_ROWS])

    def test_harmonic_number(self):
        """Test harmonic numbers."""
        self.assertAlmostEqual(harmonic_number(1), 1.0)
        self.assertAlmostEqual(harmonic_number(41), 4.30293, places=5)

    def test_bonferroni(self):
        """Test Bonferroni thresholds."""
        deltas = thresholds_bonferroni(self.family, 0.05).deltas
        np.testing.assert_allclose(deltas, 0.05 / 41)

    def test_holm(self):
        """Test Holm thresholds."""
        deltas = thresholds_holm(self.family, 0.05).deltas
        self.assertAlmostEqual(deltas[0], 0.05 / 41)
        self.assertAlmostEqual(deltas[2], 0.05 / 39)
        self.assertAlmostEqual(deltas[-1], 0.05)
        self.assertGreater(sort_family(self.family).values[2], deltas[2])

    def test_by(self):
        """Test BY thresholds."""
        thresholds = thresholds_by(self.family, 0.05)
        self.assertAlmostEqual(thresholds.deltas[0], 2.834e-4, delta=5e-7)
        self.assertAlmostEqual(thresholds.deltas[1], 5.669e-4, delta=1e-6)
        self.assertLess(thresholds.deltas[1], sort_family(self.family).values[1])
        self.assertTrue(thresholds.is_nondecreasing)
        self.assertFalse(thresholds.clamped)

    def test_alpha_domain(self):
        """Test alpha validation."""
        for fn in (thresholds_bonferroni, thresholds_holm, thresholds_by):
            with self.assertRaises(DomainError):
                fn(self.family, 1.5)

    def test_weighted_by_is_clamped(self):
        """Test clamping of weighted BY thresholds."""
        family = PValueFamily([0.001, 0.01, 0.02], weights=[0.9, 0.05, 0.05])
        thresholds = thresholds_by(family, 0.05, weighted=True)
        self.assertTrue(thresholds.clamped)
        self.assertTrue(thresholds.is_nondecreasing)
        expected = 0.05 * 0.9 * 1.0 / harmonic_number(3)
        np.testing.assert_allclose(thresholds.deltas, expected)

    def test_weighted_holm(self):
        """Test weighted Holm thresholds."""
        family = PValueFamily([0.01, 0.02, 0.03], weights=[0.5, 0.25, 0.25])
        deltas = thresholds_holm(family, 0.05, weighted=True).deltas
        np.testing.assert_allclose(deltas, [0.025, 0.025, 0.05])

    def test_weighted_holm_is_clamped(self):
        """Test that a decreasing weighted Holm threshold is raised to the running maximum."""
        family = PValueFamily([0.01, 0.02, 0.03], weights=[0.5, 0.1, 0.4])
        thresholds = thresholds_holm(family, 0.05, weighted=True)
        self.assertTrue(thresholds.clamped)
        self.assertTrue(thresholds.is_nondecreasing)
        np.testing.assert_allclose(thresholds.deltas, [0.025, 0.025, 0.05])
        self.assertEqual(run_mtp(family, 0.05, "h:weighted").rejection_count, 3)


class RuleTests(unittest.TestCase):
    """Step-up, step-down and single-step rules."""

    def test_rules_differ(self):
        """Test step-up against step-down on the same thresholds."""
        p = [0.01, 0.03, 0.04]
        deltas = [0.02, 0.02, 0.05]
        self.assertEqual(apply_step_up(p, deltas).rejection_count, 3)
        self.assertEqual(apply_step_down(p, deltas).rejection_count, 1)
        np.testing.assert_array_equal(apply_single_step(p, deltas).rejected_ranks, [True, False, True])

    def test_step_up_needs_monotone_thresholds(self):
        """Test that step-up rejects decreasing thresholds."""
        with self.assertRaises(DomainError):
            apply_step_up([0.01, 0.02], [0.05, 0.01])

    def test_length_mismatch(self):
        """Test threshold length validation."""
        with self.assertRaises(DimensionMismatch):
            apply_step_down([0.01, 0.02], [0.05])

    def test_batched_counts(self):
        """Test rejection counts over a batch of families."""
        sorted_p = np.array([[0.01, 0.03, 0.04], [0.5, 0.6, 0.7], [0.001, 0.002, 0.003]])
        deltas = np.array([0.02, 0.02, 0.05])
        np.testing.assert_array_equal(step_up_counts(sorted_p, deltas), [3, 0, 3])
        np.testing.assert_array_equal(step_down_counts(sorted_p, deltas), [1, 0, 3])

    def test_zero_tail_weight(self):
        """Test the zero tail weight error."""
        family = PValueFamily([0.01, 0.02, 0.03], weights=[1.0, 0.0, 0.0])
        with self.assertRaises(ZeroTailWeight):
            run_mtp(family, 0.05, "h:weighted")
        quiet = PValueFamily([0.2, 0.3, 0.4], weights=[1.0, 0.0, 0.0])
        self.assertEqual(run_mtp(quiet, 0.05, "h:weighted").rejection_count, 0)

    def test_decision_maps_back_to_tests(self):
        """Test mapping sorted decisions back to tests."""
        family = PValueFamily([0.5, 0.001, 0.02], ids=[10, 20, 30])
        decision = run_mtp(family, 0.05, "b")
        self.assertEqual(decision.rejected_ids, frozenset({20}))
        np.testing.assert_array_equal(decision.rejected_mask(), [False, True, False])
        np.testing.assert_array_equal(decision.ranks_by_test(), [3, 1, 2])
        np.testing.assert_allclose(decision.thresholds_by_test(), 0.05 / 3)

    def test_dp_not_classical(self):
        """Test that run_mtp refuses DP."""
        with self.assertRaises(DomainError):
            run_mtp(PValueFamily([0.01]), 0.05, "dp")


class FamilyPropertyTests(unittest.TestCase):
    """Invariants over random families."""

    KEYS = ("b", "h", "by", "b:weighted", "h:weighted", "by:weighted")

    def setUp(self):
        """Draw random families."""
        gen = RngStream(20260101, 0, (66,)).generator()
        self.families = []
        for _ in range(200):
            p = gen.uniform(size=8) ** 3
            weights = gen.uniform(0.1, 1.0, size=8)
            self.families.append(PValueFamily(p, weights / weights.sum(), ids=list(range(101, 109))))
        self.gen = gen

    def test_alpha_monotone(self):
        """Test that the rejection count never falls as alpha grows."""
        for family in self.families:
            for key in self.KEYS:
                counts = [run_mtp(family, alpha, key).rejection_count for alpha in (0.01, 0.05, 0.1, 0.2)]
                self.assertEqual(counts, sorted(counts), msg=key)

    def test_permutation_invariant(self):
        """Test that relabelling the order of the tests leaves the rejected ids unchanged."""
        for family in self.families[:50]:
            order = self.gen.permutation(family.m)
            shuffled = PValueFamily(family.values[order], family.weights[order], [family.ids[k] for k in order])
            for key in self.KEYS:
                self.assertEqual(run_mtp(shuffled, 0.05, key).rejected_ids, run_mtp(family, 0.05, key).rejected_ids,
                                 msg=key)

    def test_bonferroni_within_holm(self):
        """Test that Bonferroni rejections are a subset of Holm rejections."""
        for family in self.families:
            for alpha in (0.05, 0.2):
                self.assertLessEqual(run_mtp(family, alpha, "b").rejected_ids, run_mtp(family, alpha, "h").rejected_ids)

    def test_prefix_rejections(self):
        """Test that step-up and step-down rejections form a prefix of the sorted order."""
        for family in self.families:
            for key in ("h", "by", "h:weighted", "by:weighted"):
                decision = run_mtp(family, 0.1, key)
                expected = np.arange(family.m) < decision.rejection_count
                np.testing.assert_array_equal(decision.rejected_ranks, expected, err_msg=key)


class NullErrorRateTests(unittest.TestCase):
    """Error rates with every null hypothesis true, m = 10, alpha = 0.05."""

    @classmethod
    def setUpClass(cls):
        """Draw null p-values."""
        gen = RngStream(20260101, 0, (67,)).generator()
        m, n = 10, 100000
        null = StudentTNull([INFINITE] * m)
        t = gen.standard_normal((n, m))
        cls.sorted_p = np.sort(null.pvalues(t, np.full(m, TAIL_CODES[TailType.TWO_SIDED])), axis=1)
        cls.family = PValueFamily(np.full(m, 0.5))
        cls.n = n

    def test_bonferroni_fwer(self):
        """Test that the Bonferroni family-wise error rate stays within 3 s.e. of alpha."""
        fwer = float(np.mean(self.sorted_p[:, 0] <= 0.05 / 10))
        self.assertLessEqual(fwer, 0.05 + 3.0 * np.sqrt(0.05 * 0.95 / self.n))

    def test_by_fdr(self):
        """Test that the BY false discovery rate is at most alpha."""
        deltas = thresholds_by(self.family, 0.05).deltas
        counts = step_up_counts(self.sorted_p, deltas)
        # With every null true, the false discovery proportion is 1 whenever anything is rejected.
        self.assertLessEqual(float(np.mean(counts > 0)), 0.05)


class CaseStudyRejectionTests(unittest.TestCase):
    """Reject sets on the observed case-study p-values at alpha = 0.05."""

    def setUp(self):
        """Set up the case-study family."""
        self.family = PValueFamily(observed_pvalues(), ids=[row[0] for row in NEEDLEMAN_ROWS])

    def test_bonferroni(self):
        """Test Bonferroni rejections on the case study."""
        self.assertEqual(run_mtp(self.family, 0.05, "b").rejected_ids, frozenset({39, 40}))

    def test_holm(self):
        """Test Holm rejections on the case study."""
        self.assertEqual(run_mtp(self.family, 0.05, "h").rejected_ids, frozenset({39, 40}))

    def test_by(self):
        """Test BY rejections on the case study."""
        self.assertEqual(run_mtp(self.family, 0.05, "by").rejected_ids, frozenset())

    def test_fast_path_agrees(self):
        """Test that the batched rejection path matches run_mtp."""
        weights = np.linspace(1.0, 2.0, 41)
        family = self.family.with_weights(weights / weights.sum())
        sorted_family = sort_family(family)
        for key in ("b", "h", "by", "b:weighted", "h:weighted", "by:weighted"):
            method = MethodSpec.parse(key)
            decision = run_mtp(family, 0.05, method)
            fast = classical_rejections(sorted_family.values, sorted_family.weights if method.weighted
                                        else np.full(41, 1.0 / 41), 0.05, method)
            np.testing.assert_array_equal(fast, decision.rejected_ranks, err_msg=key)


if __name__ == '__main__':
    unittest.main()
