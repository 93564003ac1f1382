"""
dpmtp.py - Dirichlet-process multiple testing procedure

The DP-MTP replaces the fixed BY measure with a random probability measure nu
on the rank partition B_r = (r-1, r]:

    M ~ Exponential(hyper_rate)
    (nu(B_1), ..., nu(B_m)) ~ Dirichlet(M * nu0(B_1), ..., M * nu0(B_m))

with the BY baseline nu0(B_r) = 1 / (r * H_m). Each draw gives the shape
beta(r) = sum_{j <= r} j * nu(B_j) and step-up thresholds alpha * w_(r) * beta(r).
PrSig(r) is the share of draws whose step-up rejection count reaches rank r.

Changes:
- Initial implementation of the baseline, single draws and thresholds
- Vectorized PrSig over all N draws at once
- Added the per-rank comparison variant and externally supplied (shared) draws
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from modules.core.errors import DimensionMismatch, DomainError
from modules.core.rng import as_generator
from modules.core.special import sample_dirichlet
from modules.procedures.mtp import (
    PValueFamily,
    ThresholdVector,
    clamp_running_max,
    harmonic_number,
    sort_family,
    step_up_counts,
)

logger = logging.getLogger("mtppower.procedures")

DEFAULT_HYPER_RATE = 1.0


@dataclass(frozen=True)
class DpBaseline:
    """BY baseline measure nu0(r) = 1 / (r * H_m) over ranks 1..m."""

    m: int
    nu0: np.ndarray


@dataclass(frozen=True)
class DpPriorDraw:
    """One random measure: its mass parameter M and the rank masses."""

    mass: float
    masses: np.ndarray

    @property
    def m(self):
        return self.masses.size


@dataclass(frozen=True)
class PrSigVector:
    """
    Prior predictive significance probabilities.

    Attributes:
        values (numpy.ndarray): PrSig per rank, in sorted p order
        n_draws (int): Number of DP draws behind the estimate
        permutation (numpy.ndarray): 0-based original index per rank
        clamped (bool): Whether any draw's thresholds were clamped
    """

    values: np.ndarray
    n_draws: int
    permutation: np.ndarray
    clamped: bool = False

    def by_test(self):
        """PrSig in original test order."""
        out = np.empty(self.values.size)
        out[self.permutation] = self.values
        return out


def dp_baseline(m) -> DpBaseline:
    """
    Build the BY baseline for m ranks.

    Args:
        m (int): Number of hypotheses, at least 1

    Returns:
        DpBaseline: nu0 with entries 1 / (r * H_m), summing to 1
    """
    m = int(m)
    if m < 1:
        raise DomainError(f"DP baseline needs m >= 1, got {m}")
    nu0 = 1.0 / (np.arange(1, m + 1) * harmonic_number(m))
    nu0 = nu0 / nu0.sum()
    nu0.setflags(write=False)
    return DpBaseline(m, nu0)


def _check_rate(hyper_rate):
    if not hyper_rate > 0:
        raise DomainError(f"Hyperprior rate must be positive, got {hyper_rate}")


def sample_dp_masses(baseline: DpBaseline, hyper_rate, n, gen):
    """
    Draw n random measures at once.

    Args:
        baseline (DpBaseline): Centering measure
        hyper_rate (float): Rate of the exponential prior on M
        n (int): Number of draws
        gen (numpy.random.Generator): Source of randomness

    Returns:
        tuple: (M of shape (n,), masses of shape (n, m))
    """
    _check_rate(hyper_rate)
    mass = gen.exponential(1.0 / hyper_rate, size=int(n))
    mass = np.maximum(mass, np.finfo(float).tiny)
    if baseline.m == 1:
        return mass, np.ones((int(n), 1))
    masses = sample_dirichlet(mass[:, None] * baseline.nu0[None, :], gen)
    return mass, masses


def sample_dp_draw(baseline: DpBaseline, hyper_rate, rng) -> DpPriorDraw:
    """
    Draw M from its exponential hyperprior, then the rank masses from the Dirichlet.

    Args:
        baseline (DpBaseline): Centering measure
        hyper_rate (float): Exponential rate, default 1
        rng: RngStream, numpy Generator or int seed

    Returns:
        DpPriorDraw: The draw
    """
    mass, masses = sample_dp_masses(baseline, hyper_rate, 1, as_generator(rng))
    return DpPriorDraw(float(mass[0]), masses[0])


def dp_shapes(masses):
    """beta(r) = sum_{j <= r} j * nu(B_j), along the last axis."""
    masses = np.asarray(masses, dtype=float)
    return np.cumsum(masses * np.arange(1, masses.shape[-1] + 1), axis=-1)


def dp_shape(draw: DpPriorDraw, r) -> float:
    """
    Shape function of one draw at rank r.

    Raises:
        DomainError: If r is outside 1..m
    """
    if not 1 <= int(r) <= draw.m:
        raise DomainError(f"Rank {r} outside 1..{draw.m}")
    return float(dp_shapes(draw.masses)[int(r) - 1])


def _equal_weights(weights):
    return bool(np.all(weights == weights[0]))


def dp_threshold_matrix(masses, alpha, weights_sorted):
    """
    Thresholds for a batch of draws.

    Args:
        masses (numpy.ndarray): Shape (n, m) rank masses
        alpha (float): Level
        weights_sorted (numpy.ndarray): Length-m weights aligned to sorted order

    Returns:
        tuple: (deltas of shape (n, m), whether any row was clamped)
    """
    raw = alpha * weights_sorted * dp_shapes(masses)
    if _equal_weights(weights_sorted):
        return raw, False
    return clamp_running_max(raw)


def dp_thresholds(draw: DpPriorDraw, alpha, weights=None) -> ThresholdVector:
    """
    Thresholds alpha * w_(r) * beta(r) for one draw.

    Args:
        draw (DpPriorDraw): The random measure
        alpha (float): Level in (0, 1)
        weights (array-like, optional): Sorted-aligned weights; equal 1/m if None

    Returns:
        ThresholdVector: Nondecreasing thresholds (clamped for unequal weights)
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    m = draw.m
    weights = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    if weights.size != m:
        raise DimensionMismatch(f"{m} ranks but {weights.size} weights")
    deltas, clamped = dp_threshold_matrix(draw.masses[None, :], alpha, weights)
    return ThresholdVector(deltas[0], clamped)


def dp_rejection_fractions(sorted_p, weights_sorted, alpha, masses, per_rank=False):
    """
    Per-rank share of draws that reject, for one sorted family.

    With the default step-up rule draw g rejects ranks 1..R_g, so the share is
    #{g : R_g >= r} / n. The per-rank variant compares each p_(r) with its own
    threshold instead.

    Returns:
        tuple: (length-m fractions in sorted order, whether clamping fired)
    """
    deltas, clamped = dp_threshold_matrix(masses, alpha, weights_sorted)
    n, m = deltas.shape
    if per_rank:
        return np.mean(sorted_p[None, :] <= deltas, axis=0), clamped
    counts = step_up_counts(sorted_p[None, :], deltas)
    hist = np.bincount(counts, minlength=m + 1)
    at_least = np.cumsum(hist[::-1])[::-1]
    return at_least[1:] / n, clamped


def dp_prsig(
    family: PValueFamily,
    alpha,
    n_draws,
    hyper_rate=DEFAULT_HYPER_RATE,
    rng=None,
    weighted=False,
    per_rank=False,
    masses: Optional[np.ndarray] = None,
) -> PrSigVector:
    """
    Monte Carlo prior predictive significance probabilities.

    Args:
        family (PValueFamily): Observed p-values (and weights)
        alpha (float): Level in (0, 1)
        n_draws (int): Number N of DP draws
        hyper_rate (float): Exponential rate of M
        rng: RngStream, numpy Generator or int seed
        weighted (bool): Use the family weights instead of 1/m
        per_rank (bool): Per-rank comparison instead of the step-up rule
        masses (numpy.ndarray, optional): Pre-drawn (N, m) rank masses to reuse

    Returns:
        PrSigVector: PrSig per rank, nonincreasing in rank under step-up
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    if int(n_draws) < 1:
        raise DomainError(f"Number of DP draws must be at least 1, got {n_draws}")
    sorted_family = sort_family(family)
    weights = sorted_family.weights if weighted else np.full(family.m, 1.0 / family.m)
    if masses is None:
        _, masses = sample_dp_masses(dp_baseline(family.m), hyper_rate, n_draws, as_generator(rng))
    elif masses.shape[-1] != family.m:
        raise DimensionMismatch(f"Draws have {masses.shape[-1]} ranks, family has {family.m}")
    fractions, clamped = dp_rejection_fractions(sorted_family.values, weights, alpha, masses, per_rank)
    if clamped:
        logger.debug("Weighted DP thresholds clamped to their running maximum")
    return PrSigVector(fractions, int(masses.shape[0]), sorted_family.permutation, clamped)
