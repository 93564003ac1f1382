"""
mtp.py - Classical multiple testing procedures

Bonferroni, Holm and Benjamini-Yekutieli, unweighted and weighted, expressed
through threshold vectors over the sorted p-values. A procedure is a thresholds
function plus a rejection rule:

- Bonferroni: single-step (each sorted p against its own threshold)
- Holm: step-down (reject until the first exceedance)
- BY: step-up (reject up to the largest rank under its threshold)

Weights attach to hypotheses; after sorting by raw p, w_(r) is the weight of
the rank-r hypothesis.

Changes:
- Initial implementation of PValueFamily, ThresholdVector and MtpDecision
- Weighted Holm thresholds clamped to their running maximum
- Bonferroni exposed as its own single-step rule
- Weighted BY thresholds clamped to their running maximum, with a flag
- Added array kernels (step_up_counts, step_down_counts) for the power loop
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import FrozenSet, Optional, Sequence

import numpy as np

from modules.core.errors import DimensionMismatch, DomainError, ZeroTailWeight

logger = logging.getLogger("mtppower.procedures")

WEIGHT_SUM_TOL = 1e-9


class MtpKind(Enum):
    """The procedures known to the power engine."""

    BONFERRONI = "b"
    HOLM = "h"
    BY = "by"
    DP = "dp"

    @property
    def short(self):
        return self.value.upper()


@dataclass(frozen=True)
class MethodSpec:
    """
    A procedure together with its weighting mode.

    Attributes:
        kind (MtpKind): Which procedure
        weighted (bool): Use the family's weights instead of equal weights
    """

    kind: MtpKind
    weighted: bool = False

    @classmethod
    def parse(cls, raw) -> "MethodSpec":
        """
        Parse "b", "h", "by" or "dp", optionally suffixed with ":weighted" (or ":w").

        Args:
            raw (str or MethodSpec): Method text

        Returns:
            MethodSpec: The parsed method
        """
        if isinstance(raw, MethodSpec):
            return raw
        text = str(raw).strip().lower()
        name, _, suffix = text.partition(":")
        try:
            kind = MtpKind(name)
        except ValueError:
            raise DomainError(f"Unknown method '{raw}' (expected b, h, by or dp)")
        if suffix not in ("", "weighted", "w"):
            raise DomainError(f"Unknown method modifier '{suffix}' in '{raw}'")
        return cls(kind, suffix != "")

    @property
    def label(self):
        """Display name, e.g. "BY" or "BY.w"."""
        return f"{self.kind.short}.w" if self.weighted else self.kind.short

    @property
    def key(self):
        """Canonical text form accepted by parse()."""
        return f"{self.kind.value}:weighted" if self.weighted else self.kind.value

    def unweighted(self) -> "MethodSpec":
        return MethodSpec(self.kind, False)

    def __str__(self):
        return self.label


def harmonic_number(m):
    """H_m = sum_{j=1}^m 1/j."""
    return float(np.sum(1.0 / np.arange(1, int(m) + 1)))


def normalize_weights(raw) -> np.ndarray:
    """
    Scale nonnegative weights to sum to 1.

    Raises:
        DomainError: If a weight is negative or all are zero
    """
    w = np.asarray(raw, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError("Weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise DomainError("Weights must not all be zero")
    return w / total


class PValueFamily:
    """
    A family of p-values with hypothesis weights and identifiers.

    Args:
        values (array-like): Length-m p-values in [0, 1]
        weights (array-like, optional): Nonnegative weights summing to 1;
            None gives equal weights 1/m
        ids (sequence, optional): Test identifiers; defaults to 1..m
    """

    def __init__(self, values, weights=None, ids=None):
        values = np.array(values, dtype=float).reshape(-1)
        m = values.size
        if m < 1:
            raise DomainError("A p-value family needs at least one p-value")
        if np.any(~((values >= 0.0) & (values <= 1.0))):
            raise DomainError("p-values must lie in [0, 1]")
        if weights is None:
            weights = np.full(m, 1.0 / m)
        else:
            weights = np.array(weights, dtype=float).reshape(-1)
            if weights.size != m:
                raise DimensionMismatch(f"{m} p-values but {weights.size} weights")
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise DomainError("Weights must be finite and nonnegative")
            if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
                raise DomainError(f"Weights must sum to 1, got {weights.sum():.12g}")
        if ids is None:
            ids = list(range(1, m + 1))
        ids = list(ids)
        if len(ids) != m:
            raise DimensionMismatch(f"{m} p-values but {len(ids)} ids")
        self.values = values
        self.weights = weights
        self.ids = ids

    @property
    def m(self):
        return self.values.size

    def with_weights(self, weights) -> "PValueFamily":
        return PValueFamily(self.values, weights, self.ids)

    def __len__(self):
        return self.m

    def __repr__(self):
        return f"PValueFamily(m={self.m})"


@dataclass(frozen=True)
class SortedFamily:
    """p-values in ascending order with aligned weights and the sorting permutation."""

    values: np.ndarray
    weights: np.ndarray
    permutation: np.ndarray


def sort_family(family: PValueFamily) -> SortedFamily:
    """
    Stable ascending sort of a family by raw p-value.

    Ties keep their original order. permutation[r] is the 0-based original
    index of the hypothesis at rank r + 1.
    """
    perm = np.argsort(family.values, kind="stable")
    return SortedFamily(family.values[perm], family.weights[perm], perm)


@dataclass(frozen=True)
class ThresholdVector:
    """
    Per-rank rejection thresholds Delta(1..m) over sorted p-values.

    Attributes:
        deltas (numpy.ndarray): Nonnegative thresholds; NaN marks a rank whose
            threshold is undefined (weighted Holm with zero tail weight)
        clamped (bool): True if raw thresholds were raised to their running maximum
    """

    deltas: np.ndarray
    clamped: bool = False

    def __post_init__(self):
        deltas = np.asarray(self.deltas, dtype=float)
        if deltas.ndim != 1:
            raise DimensionMismatch("Thresholds must be a 1-D vector")
        if np.any(deltas[~np.isnan(deltas)] < 0):
            raise DomainError("Thresholds must be nonnegative")
        object.__setattr__(self, "deltas", deltas)

    @property
    def m(self):
        return self.deltas.size

    @property
    def is_nondecreasing(self):
        return bool(np.all(np.diff(self.deltas) >= 0))

    def __len__(self):
        return self.m


def clamp_running_max(deltas):
    """
    Raise thresholds to their running maximum.

    Returns:
        tuple: (clamped deltas, whether any entry changed)
    """
    clamped = np.maximum.accumulate(deltas, axis=-1)
    return clamped, bool(np.any(clamped != deltas))


@dataclass(frozen=True)
class MtpDecision:
    """
    Outcome of one procedure on one family.

    Attributes:
        rejection_count (int): Number of rejected hypotheses R
        rejected_ranks (numpy.ndarray): Boolean, in sorted order
        rejected_ids (frozenset): Identifiers of rejected hypotheses
        thresholds (ThresholdVector): Thresholds used
        sort_permutation (numpy.ndarray): 0-based original index per rank
        sorted_values (numpy.ndarray): The sorted p-values
    """

    rejection_count: int
    rejected_ranks: np.ndarray
    rejected_ids: FrozenSet
    thresholds: ThresholdVector
    sort_permutation: np.ndarray
    sorted_values: np.ndarray
    method: Optional[MethodSpec] = field(default=None, compare=False)

    def rejected_mask(self):
        """Boolean rejection flags in original test order."""
        mask = np.zeros(self.rejected_ranks.size, dtype=bool)
        mask[self.sort_permutation] = self.rejected_ranks
        return mask

    def thresholds_by_test(self):
        """Thresholds in original test order."""
        out = np.empty(self.thresholds.m)
        out[self.sort_permutation] = self.thresholds.deltas
        return out

    def ranks_by_test(self):
        """1-based rank of each test in original order."""
        ranks = np.empty(self.sort_permutation.size, dtype=int)
        ranks[self.sort_permutation] = np.arange(1, self.sort_permutation.size + 1)
        return ranks


def _sorted_weights(family, sorted_family, weighted):
    if weighted:
        return sorted_family.weights
    return np.full(family.m, 1.0 / family.m)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly between 0 and 1, got {alpha}")


def thresholds_bonferroni(family: PValueFamily, alpha, weighted=False, sorted_family=None) -> ThresholdVector:
    """
    Bonferroni thresholds: alpha/m, or alpha * w_(r) when weighted.

    Args:
        family (PValueFamily): The family
        alpha (float): Level in (0, 1)
        weighted (bool): Use the family weights
        sorted_family (SortedFamily, optional): Precomputed sort of family

    Returns:
        ThresholdVector: Thresholds in sorted order
    """
    _check_alpha(alpha)
    if not weighted:
        return ThresholdVector(np.full(family.m, alpha / family.m))
    sorted_family = sorted_family or sort_family(family)
    return ThresholdVector(alpha * sorted_family.weights)


def thresholds_holm(family: PValueFamily, alpha, weighted=False, sorted_family=None) -> ThresholdVector:
    """
    Holm thresholds alpha / (m - r + 1), or alpha * w_(r) / sum_{k >= r} w_(k)
    clamped to its running maximum.

    Ranks whose tail weight is zero get NaN; apply_step_down raises
    ZeroTailWeight only if it reaches one.
    """
    _check_alpha(alpha)
    m = family.m
    if not weighted:
        return ThresholdVector(alpha / (m - np.arange(m)))
    sorted_family = sorted_family or sort_family(family)
    deltas, clamped = weighted_holm_deltas(sorted_family.weights, alpha)
    if clamped:
        logger.debug("Weighted Holm thresholds clamped to their running maximum")
    return ThresholdVector(deltas, clamped)


def weighted_holm_deltas(weights_sorted, alpha):
    """
    Weighted Holm thresholds in sorted order, clamped to their running maximum.

    A zero tail weight leaves NaN from that rank on. Zero tails form a suffix,
    so only the finite prefix is clamped.

    Returns:
        tuple: (deltas, whether clamping changed any entry)
    """
    tail = np.cumsum(weights_sorted[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        deltas = np.where(tail > 0, alpha * weights_sorted / np.where(tail > 0, tail, 1.0), np.nan)
    finite = ~np.isnan(deltas)
    deltas[finite], clamped = clamp_running_max(deltas[finite])
    return deltas, clamped


def by_shape(m):
    """BY shape beta(r) = r / H_m for r = 1..m."""
    return np.arange(1, m + 1) / harmonic_number(m)


def thresholds_by(family: PValueFamily, alpha, weighted=False, sorted_family=None) -> ThresholdVector:
    """
    Benjamini-Yekutieli thresholds.

    Unweighted: alpha * r / (m * H_m). Weighted: alpha * w_(r) * r / H_m,
    clamped to its running maximum when the raw vector decreases.
    """
    _check_alpha(alpha)
    m = family.m
    shape = by_shape(m)
    if not weighted:
        return ThresholdVector(alpha * shape / m)
    sorted_family = sorted_family or sort_family(family)
    raw = alpha * sorted_family.weights * shape
    deltas, clamped = clamp_running_max(raw)
    if clamped:
        logger.debug("Weighted BY thresholds clamped to their running maximum")
    return ThresholdVector(deltas, clamped)


def step_up_counts(sorted_p, deltas):
    """
    Largest r with p_(r) <= Delta(r), for one family or a batch along axis 0.

    Args:
        sorted_p (numpy.ndarray): Sorted p-values, shape (..., m)
        deltas (numpy.ndarray): Thresholds broadcastable to sorted_p

    Returns:
        numpy.ndarray or int: Rejection counts
    """
    ok = np.asarray(sorted_p) <= np.asarray(deltas)
    m = ok.shape[-1]
    last = m - np.argmax(ok[..., ::-1], axis=-1)
    return np.where(ok.any(axis=-1), last, 0)


def step_down_counts(sorted_p, deltas):
    """Number of leading ranks with p_(r) <= Delta(r), for one family or a batch."""
    ok = np.asarray(sorted_p) <= np.asarray(deltas)
    m = ok.shape[-1]
    first_fail = np.argmin(ok, axis=-1)
    return np.where(ok.all(axis=-1), m, first_fail)


def _decision(rejected_ranks, thresholds, permutation, sorted_p, ids, method=None):
    rejected_ranks = np.asarray(rejected_ranks, dtype=bool)
    rejected_ids = frozenset(ids[i] for i in permutation[rejected_ranks])
    return MtpDecision(
        rejection_count=int(rejected_ranks.sum()),
        rejected_ranks=rejected_ranks,
        rejected_ids=rejected_ids,
        thresholds=thresholds,
        sort_permutation=np.asarray(permutation),
        sorted_values=np.asarray(sorted_p, dtype=float),
        method=method,
    )


def _defaults(sorted_p, permutation, ids):
    m = len(sorted_p)
    if permutation is None:
        permutation = np.arange(m)
    if ids is None:
        ids = list(range(1, m + 1))
    return np.asarray(permutation), ids


def _coerce_thresholds(sorted_p, thresholds):
    if not isinstance(thresholds, ThresholdVector):
        thresholds = ThresholdVector(thresholds)
    if thresholds.m != len(sorted_p):
        raise DimensionMismatch(f"{len(sorted_p)} p-values but {thresholds.m} thresholds")
    return thresholds


def apply_step_up(sorted_p, thresholds, permutation=None, ids=None, method=None) -> MtpDecision:
    """
    Step-up rule: reject ranks 1..R, R = max{r : p_(r) <= Delta(r)}.

    Args:
        sorted_p (array-like): Ascending p-values
        thresholds (ThresholdVector or array-like): Nondecreasing thresholds
        permutation (array-like, optional): Original index per rank
        ids (sequence, optional): Original test identifiers

    Raises:
        DomainError: If the thresholds decrease somewhere
    """
    sorted_p = np.asarray(sorted_p, dtype=float)
    thresholds = _coerce_thresholds(sorted_p, thresholds)
    if not thresholds.is_nondecreasing:
        raise DomainError("Step-up thresholds must be nondecreasing")
    permutation, ids = _defaults(sorted_p, permutation, ids)
    count = int(step_up_counts(sorted_p, thresholds.deltas))
    return _decision(np.arange(sorted_p.size) < count, thresholds, permutation, sorted_p, ids, method)


def apply_step_down(sorted_p, thresholds, permutation=None, ids=None, method=None) -> MtpDecision:
    """
    Step-down rule: reject ranks until the first p_(r) > Delta(r).

    Raises:
        ZeroTailWeight: If the rule reaches a rank with an undefined threshold
    """
    sorted_p = np.asarray(sorted_p, dtype=float)
    thresholds = _coerce_thresholds(sorted_p, thresholds)
    permutation, ids = _defaults(sorted_p, permutation, ids)
    count = int(step_down_counts(sorted_p, thresholds.deltas))
    if count < sorted_p.size and np.isnan(thresholds.deltas[count]):
        raise ZeroTailWeight(f"Weighted Holm reached rank {count + 1} whose remaining weight is zero")
    return _decision(np.arange(sorted_p.size) < count, thresholds, permutation, sorted_p, ids, method)


def apply_single_step(sorted_p, thresholds, permutation=None, ids=None, method=None) -> MtpDecision:
    """Single-step rule: reject every rank with p_(r) <= Delta(r)."""
    sorted_p = np.asarray(sorted_p, dtype=float)
    thresholds = _coerce_thresholds(sorted_p, thresholds)
    permutation, ids = _defaults(sorted_p, permutation, ids)
    return _decision(sorted_p <= thresholds.deltas, thresholds, permutation, sorted_p, ids, method)


_CLASSICAL = {
    MtpKind.BONFERRONI: (thresholds_bonferroni, apply_single_step),
    MtpKind.HOLM: (thresholds_holm, apply_step_down),
    MtpKind.BY: (thresholds_by, apply_step_up),
}


def run_mtp(family: PValueFamily, alpha, method) -> MtpDecision:
    """
    Apply one classical procedure to a family.

    Args:
        family (PValueFamily): The family
        alpha (float): Level in (0, 1)
        method (MethodSpec or str): b, h or by, optionally weighted

    Returns:
        MtpDecision: The decision
    """
    method = MethodSpec.parse(method)
    if method.kind not in _CLASSICAL:
        raise DomainError(f"run_mtp handles B, H and BY; use dp_prsig for {method.label}")
    thresholds_fn, rule = _CLASSICAL[method.kind]
    sorted_family = sort_family(family)
    thresholds = thresholds_fn(family, alpha, weighted=method.weighted, sorted_family=sorted_family)
    return rule(sorted_family.values, thresholds, sorted_family.permutation, family.ids, method)


def classical_rejections(sorted_p, weights_sorted, alpha, method: MethodSpec):
    """
    Boolean rejections in sorted order for one family, without building a decision.

    Used by the power loop. weights_sorted must already be aligned to sorted order.
    """
    m = sorted_p.size
    if method.kind is MtpKind.BONFERRONI:
        deltas = alpha * weights_sorted if method.weighted else np.full(m, alpha / m)
        return sorted_p <= deltas
    if method.kind is MtpKind.HOLM:
        if method.weighted:
            deltas, _ = weighted_holm_deltas(weights_sorted, alpha)
        else:
            deltas = _holm_unweighted(m, alpha)
        count = int(step_down_counts(sorted_p, deltas))
        if count < m and np.isnan(deltas[count]):
            raise ZeroTailWeight(f"Weighted Holm reached rank {count + 1} whose remaining weight is zero")
        return np.arange(m) < count
    if method.kind is MtpKind.BY:
        shape = _by_shape_cached(m)
        if method.weighted:
            deltas, _ = clamp_running_max(alpha * weights_sorted * shape)
        else:
            deltas = alpha * shape / m
        return np.arange(m) < int(step_up_counts(sorted_p, deltas))
    raise DomainError(f"classical_rejections does not handle {method.label}")


@lru_cache(maxsize=32)
def _by_shape_cached(m):
    shape = by_shape(m)
    shape.setflags(write=False)
    return shape


@lru_cache(maxsize=128)
def _holm_unweighted(m, alpha):
    deltas = alpha / (m - np.arange(m))
    deltas.setflags(write=False)
    return deltas


def parse_methods(raw: Sequence) -> list:
    """Parse and de-duplicate a list of method strings, keeping first-seen order."""
    seen = []
    for item in raw:
        method = MethodSpec.parse(item)
        if method not in seen:
            seen.append(method)
    return seen
