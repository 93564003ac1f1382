"""
correlation.py - Correlation matrices, Cholesky factors and correlation samplers

Uniform sampling over m x m correlation matrices (LKJ with eta = 1) through the
spherical-angle parameterization of the Cholesky factor, plus a checked
Cholesky decomposition and a fixed (point-mass) sampler for conditional power
analysis.

Angle theta_ij in column j (1-based) of the factor has density proportional to
sin^(m - j); its cosine is 2B - 1 with B ~ Beta((m - j + 1)/2, (m - j + 1)/2).
This choice makes every off-diagonal marginal a rescaled Beta(m/2, m/2).

Changes:
- Initial implementation of CorrelationMatrix and CholeskyFactor
- Vectorized angle construction of the Cholesky factor
- Added CorrelationSampler interface with uniform and fixed implementations
- cholesky delegates to numpy.linalg and reports the first failing pivot
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular

from modules.core.errors import DimensionMismatch, DomainError, NotPositiveDefinite
from modules.core.rng import as_generator

PIVOT_FLOOR = 1e-12
_SYMMETRY_TOL = 1e-10


class CorrelationMatrix:
    """
    A symmetric, unit-diagonal, positive definite matrix.

    Args:
        entries (array-like): m x m matrix
        floor (float): Positive-definiteness floor on Cholesky pivots
    """

    def __init__(self, entries, floor=PIVOT_FLOOR):
        entries = np.array(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise DimensionMismatch(f"Correlation matrix must be square, got shape {entries.shape}")
        if not np.allclose(entries, entries.T, atol=_SYMMETRY_TOL, rtol=0.0):
            raise DomainError("Correlation matrix must be symmetric")
        if not np.allclose(np.diag(entries), 1.0, atol=_SYMMETRY_TOL, rtol=0.0):
            raise DomainError("Correlation matrix must have a unit diagonal")
        if np.any(np.abs(entries) > 1.0 + _SYMMETRY_TOL):
            raise DomainError("Correlation matrix entries must lie in [-1, 1]")
        self.entries = entries
        self._factor = cholesky(entries, floor=floor)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def factor(self) -> "CholeskyFactor":
        """The Cholesky factor computed at construction."""
        return self._factor

    def off_diagonal(self):
        """Strict upper-triangle entries in row-major order."""
        rows, cols = np.triu_indices(self.dim, k=1)
        return self.entries[rows, cols]

    def __repr__(self):
        return f"CorrelationMatrix(dim={self.dim})"


class CholeskyFactor:
    """
    Lower-triangular factor A with a strictly positive diagonal.

    Args:
        lower (array-like): m x m lower-triangular matrix
    """

    def __init__(self, lower):
        lower = np.array(lower, dtype=float)
        if lower.ndim != 2 or lower.shape[0] != lower.shape[1]:
            raise DimensionMismatch(f"Cholesky factor must be square, got shape {lower.shape}")
        if np.any(np.triu(lower, k=1) != 0.0):
            raise DomainError("Cholesky factor must be lower triangular")
        if np.any(np.diag(lower) <= 0.0):
            raise DomainError("Cholesky factor must have a strictly positive diagonal")
        self.lower = lower

    @property
    def dim(self):
        return self.lower.shape[0]

    def reconstruct(self):
        """Return A @ A.T."""
        return self.lower @ self.lower.T

    def __repr__(self):
        return f"CholeskyFactor(dim={self.dim})"


def cholesky(matrix, floor=PIVOT_FLOOR) -> CholeskyFactor:
    """
    Cholesky-decompose a symmetric positive definite matrix.

    Args:
        matrix: CorrelationMatrix or a symmetric array
        floor (float): Pivots at or below this value are rejected

    Returns:
        CholeskyFactor: Lower-triangular A with A @ A.T == matrix

    Raises:
        DomainError: If the input is not symmetric
        NotPositiveDefinite: If a pivot falls at or below floor
    """
    a = matrix.entries if isinstance(matrix, CorrelationMatrix) else np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=_SYMMETRY_TOL, rtol=0.0):
        raise DomainError("Cholesky input must be symmetric")

    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        lower = None
    if lower is not None and np.all(np.diag(lower) ** 2 > floor):
        return CholeskyFactor(lower)
    index, pivot = _first_low_pivot(a, floor)
    raise NotPositiveDefinite(index, pivot, floor)


def _first_low_pivot(a, floor):
    """Index and value of the first Schur-complement pivot at or below floor."""
    m = a.shape[0]
    pivot = float(a[0, 0])
    for j in range(m):
        if j > 0:
            head = np.linalg.cholesky(a[:j, :j])
            row = solve_triangular(head, a[:j, j], lower=True)
            pivot = float(a[j, j] - row @ row)
        if pivot <= floor:
            return j, pivot
    return m - 1, pivot


@lru_cache(maxsize=64)
def _angle_shapes(m):
    # Beta shape for each strictly-lower position; column c (0-based) uses (m - c) / 2.
    rows, cols = np.tril_indices(m, k=-1)
    shapes = (m - cols) / 2.0
    shapes.setflags(write=False)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols, shapes


def uniform_cholesky_lower(m, gen):
    """
    Draw the Cholesky factor of an LKJ(1) correlation matrix as a plain array.

    Args:
        m (int): Dimension
        gen (numpy.random.Generator): Source of randomness

    Returns:
        numpy.ndarray: m x m lower-triangular factor with unit-norm rows
    """
    if m == 1:
        return np.ones((1, 1))
    rows, cols, shapes = _angle_shapes(m)
    cosines = 2.0 * gen.beta(shapes, shapes) - 1.0
    sines = np.sqrt(np.clip(1.0 - cosines * cosines, 0.0, 1.0))

    cos_full = np.eye(m)
    cos_full[rows, cols] = cosines
    sin_full = np.ones((m, m))
    sin_full[rows, cols] = sines

    # Exclusive running product of sines along each row.
    sin_prefix = np.ones((m, m))
    sin_prefix[:, 1:] = np.cumprod(sin_full[:, :-1], axis=1)
    return cos_full * sin_prefix


def sample_uniform_correlation(m, rng) -> CorrelationMatrix:
    """
    Draw a correlation matrix uniformly from the set of m x m correlation matrices.

    Args:
        m (int): Dimension, at least 1
        rng: RngStream, numpy Generator or int seed

    Returns:
        CorrelationMatrix: The sampled matrix
    """
    if int(m) < 1:
        raise DomainError(f"Dimension must be at least 1, got {m}")
    lower = uniform_cholesky_lower(int(m), as_generator(rng))
    entries = lower @ lower.T
    entries = (entries + entries.T) / 2.0
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix(entries)


class CorrelationSampler:
    """Base class for per-iteration correlation draws in the power loop."""

    dim = None

    def sample_lower(self, gen):
        """
        Draw the lower Cholesky factor of a correlation matrix.

        Args:
            gen (numpy.random.Generator): Source of randomness

        Returns:
            numpy.ndarray: m x m lower-triangular factor
        """
        raise NotImplementedError("Subclasses must implement sample_lower()")

    def sample_factor(self, rng) -> CholeskyFactor:
        return CholeskyFactor(self.sample_lower(as_generator(rng)))

    def describe(self):
        """Short name used in report provenance."""
        raise NotImplementedError("Subclasses must implement describe()")


class UniformCorrelationSampler(CorrelationSampler):
    """LKJ(1): uniform over all m x m correlation matrices."""

    def __init__(self, m):
        if int(m) < 1:
            raise DomainError(f"Dimension must be at least 1, got {m}")
        self.dim = int(m)

    def sample_lower(self, gen):
        return uniform_cholesky_lower(self.dim, gen)

    def describe(self):
        return "uniform"


class FixedCorrelationSampler(CorrelationSampler):
    """
    Point-mass prior on one correlation matrix (conditional power analysis).

    The factor is computed once; draws consume no randomness.
    """

    def __init__(self, matrix):
        if not isinstance(matrix, CorrelationMatrix):
            matrix = CorrelationMatrix(matrix)
        self.matrix = matrix
        self.dim = matrix.dim
        self._lower = matrix.factor.lower.copy()
        self._lower.setflags(write=False)

    def sample_lower(self, gen):
        return self._lower

    def describe(self):
        return "fixed"
