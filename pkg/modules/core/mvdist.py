"""
mvdist.py - Multivariate normal and Student-t samplers, p-value conversion

Three samplers share one stochastic representation with element-wise chi-square
divisors sqrt(V_j / nu_j):

- sample_mv_normal:        mu + A Z
- sample_mvt_vector_dof:   mu + (A Z) / divisor
- sample_mv_noncentral_t:  (mu + A Z) / divisor

Coordinates with INFINITE degrees of freedom always get a divisor of exactly 1.
Every sampler accepts an optional size to draw a batch of vectors at once.

Conversions between statistics and p-values go through a NullDistribution, so
other null laws can be plugged into the power loop.

Changes:
- Initial implementation of the three samplers
- pvalue_from_stat / stat_from_pvalue use the symmetric tail to keep precision
- Added NullDistribution with the StudentTNull implementation
"""

from __future__ import annotations

import numpy as np

from modules.core.correlation import CholeskyFactor
from modules.core.errors import DimensionMismatch, DomainError
from modules.core.rng import as_generator
from modules.core.special import (
    chi_square_divisors,
    student_t_cdf,
    student_t_cdf_vector,
    student_t_quantile,
)
from modules.core.types import TailType, as_dof

# Integer codes used by the vectorized p-value path.
TAIL_CODES = {TailType.LOWER: 0, TailType.UPPER: 1, TailType.TWO_SIDED: 2}


def as_noncentrality(mu):
    """Validate and return a finite 1-D location vector."""
    mu = np.asarray(mu, dtype=float)
    if mu.ndim != 1:
        raise DimensionMismatch(f"Location vector must be 1-D, got shape {mu.shape}")
    if not np.all(np.isfinite(mu)):
        raise DomainError("Location vector entries must be finite")
    return mu


def _lower_of(chol):
    return chol.lower if isinstance(chol, CholeskyFactor) else np.asarray(chol, dtype=float)


def _dofs_array(dofs, m):
    values = np.array([as_dof(d).value for d in dofs], dtype=float)
    if values.shape != (m,):
        raise DimensionMismatch(f"Expected {m} degrees of freedom, got {values.size}")
    return values


def _correlated_normal(mu, chol, gen, size):
    mu = as_noncentrality(mu)
    lower = _lower_of(chol)
    if lower.shape != (mu.size, mu.size):
        raise DimensionMismatch(f"Location has length {mu.size} but the factor is {lower.shape}")
    shape = (mu.size,) if size is None else (size, mu.size)
    z = gen.standard_normal(shape)
    return mu, z @ lower.T


def sample_mv_normal(mu, chol, rng, size=None):
    """
    Draw Y = mu + A Z with Z standard normal.

    Args:
        mu (array-like): Length-m location vector
        chol: CholeskyFactor or m x m lower-triangular array
        rng: RngStream, numpy Generator or int seed
        size (int, optional): Number of vectors to draw

    Returns:
        numpy.ndarray: Shape (m,) or (size, m)
    """
    gen = as_generator(rng)
    mu, az = _correlated_normal(mu, chol, gen, size)
    return mu + az


def sample_mvt_vector_dof(mu, chol, dofs, rng, size=None):
    """
    Draw the multivariate t with per-coordinate degrees of freedom.

    Only the correlated normal is divided by the chi-square divisors; the
    location is added afterwards.
    """
    gen = as_generator(rng)
    mu, az = _correlated_normal(mu, chol, gen, size)
    divisors = chi_square_divisors(_dofs_array(dofs, mu.size), gen, size=size)
    return mu + az / divisors


def sample_mv_noncentral_t(mu, chol, dofs, rng, size=None):
    """
    Draw the multivariate upper non-central t.

    The whole shifted normal mu + A Z is divided element-wise by the
    chi-square divisors. With mu = 0 this has the same law as
    sample_mvt_vector_dof.

    Args:
        mu (array-like): Length-m noncentrality vector
        chol: CholeskyFactor or m x m lower-triangular array
        dofs: Length-m sequence of degrees of freedom
        rng: RngStream, numpy Generator or int seed
        size (int, optional): Number of vectors to draw

    Returns:
        numpy.ndarray: Shape (m,) or (size, m)
    """
    gen = as_generator(rng)
    mu, az = _correlated_normal(mu, chol, gen, size)
    divisors = chi_square_divisors(_dofs_array(dofs, mu.size), gen, size=size)
    return (mu + az) / divisors


def noncentral_t_draw(mu, lower, dof_values, gen):
    """
    One noncentral-t vector without argument checks, for the power loop.

    Args:
        mu (numpy.ndarray): Length-m location
        lower (numpy.ndarray): m x m lower-triangular factor
        dof_values (numpy.ndarray): Length-m float degrees of freedom (inf allowed)
        gen (numpy.random.Generator): Source of randomness
    """
    z = gen.standard_normal(mu.size)
    return (mu + lower @ z) / chi_square_divisors(dof_values, gen)


def pvalue_from_stat(t, dof, tail):
    """
    Convert a test statistic into a p-value.

    Args:
        t (float): Statistic
        dof: Degrees of freedom of the null
        tail (TailType or str): Rejection direction

    Returns:
        float: TWO_SIDED 2F(-|t|), LOWER F(t), UPPER 1 - F(t)
    """
    tail = TailType.parse(tail)
    if tail is TailType.TWO_SIDED:
        return min(1.0, 2.0 * student_t_cdf(-abs(t), dof))
    if tail is TailType.LOWER:
        return student_t_cdf(t, dof)
    return student_t_cdf(-t, dof)


def stat_from_pvalue(p, dof, tail):
    """
    Invert pvalue_from_stat.

    TWO_SIDED returns the nonnegative root F^-1(1 - p/2), computed as
    -F^-1(p/2).

    Raises:
        DomainError: If p is not in (0, 1]
    """
    tail = TailType.parse(tail)
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p-value must lie in (0, 1], got {p}")
    if tail is TailType.TWO_SIDED:
        if p == 1.0:
            return 0.0
        return abs(float(student_t_quantile(p / 2.0, dof)))
    if p == 1.0:
        return np.inf if tail is TailType.LOWER else -np.inf
    if tail is TailType.LOWER:
        return float(student_t_quantile(p, dof))
    return -float(student_t_quantile(p, dof))


class NullDistribution:
    """Null law of a vector of test statistics, applied coordinate-wise."""

    def cdf(self, t):
        """
        Element-wise null CDF.

        Args:
            t (numpy.ndarray): Statistics with last axis of length m

        Returns:
            numpy.ndarray: CDF values, same shape as t
        """
        raise NotImplementedError("Subclasses must implement cdf()")

    def pvalues(self, t, tail_codes):
        """
        Element-wise p-values for a batch of statistics.

        Args:
            t (numpy.ndarray): Statistics with last axis of length m
            tail_codes (numpy.ndarray): Length-m codes from TAIL_CODES

        Returns:
            numpy.ndarray: p-values in [0, 1], same shape as t
        """
        t = np.asarray(t, dtype=float)
        tail_codes = np.asarray(tail_codes)
        lower = self.cdf(t)
        upper = self.cdf(-t)
        two = np.minimum(1.0, 2.0 * self.cdf(-np.abs(t)))
        return np.select([tail_codes == 0, tail_codes == 1], [lower, upper], default=two)


class StudentTNull(NullDistribution):
    """
    Independent Student-t nulls, standard normal where dof is INFINITE.

    Args:
        dofs: Length-m sequence of degrees of freedom
    """

    def __init__(self, dofs):
        self.dofs = np.array([as_dof(d).value for d in dofs], dtype=float)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if t.shape[-1] != self.dofs.size:
            raise DimensionMismatch(f"Expected {self.dofs.size} statistics, got {t.shape[-1]}")
        return student_t_cdf_vector(t, self.dofs)
