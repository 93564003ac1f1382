"""
mtppower.core - Core types and sampling kernels for mtppower

This package provides the domain types (degrees of freedom, tail types, test
specifications), the exception hierarchy, reproducible random streams, special
functions, correlation-matrix sampling and the multivariate samplers.

Changes:
- Initial implementation of the core package
- Expose the correlation sampler interface and the null-distribution plug-in
"""

from modules.core.errors import (
    MtpPowerError,
    DomainError,
    DimensionMismatch,
    NotPositiveDefinite,
    ZeroTailWeight,
    AllZeroPower,
    MissingObservedP,
    Unreachable,
    ConfigError,
    SchemaError,
)
from modules.core.types import DegreesOfFreedom, INFINITE, TailType, TestSpec, as_dof
from modules.core.rng import RngStream, as_generator
from modules.core.special import (
    std_normal_cdf,
    std_normal_quantile,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_quantile,
    sample_gamma,
    sample_chi_square,
    sample_dirichlet,
    sample_exponential,
)
from modules.core.correlation import (
    CorrelationMatrix,
    CholeskyFactor,
    CorrelationSampler,
    UniformCorrelationSampler,
    FixedCorrelationSampler,
    cholesky,
    sample_uniform_correlation,
)
from modules.core.mvdist import (
    NullDistribution,
    StudentTNull,
    sample_mv_normal,
    sample_mvt_vector_dof,
    sample_mv_noncentral_t,
    pvalue_from_stat,
    stat_from_pvalue,
)

__all__ = [
    'MtpPowerError',
    'DomainError',
    'DimensionMismatch',
    'NotPositiveDefinite',
    'ZeroTailWeight',
    'AllZeroPower',
    'MissingObservedP',
    'Unreachable',
    'ConfigError',
    'SchemaError',
    'DegreesOfFreedom',
    'INFINITE',
    'TailType',
    'TestSpec',
    'as_dof',
    'RngStream',
    'as_generator',
    'std_normal_cdf',
    'std_normal_quantile',
    'regularized_incomplete_beta',
    'student_t_cdf',
    'student_t_quantile',
    'sample_gamma',
    'sample_chi_square',
    'sample_dirichlet',
    'sample_exponential',
    'CorrelationMatrix',
    'CholeskyFactor',
    'CorrelationSampler',
    'UniformCorrelationSampler',
    'FixedCorrelationSampler',
    'cholesky',
    'sample_uniform_correlation',
    'NullDistribution',
    'StudentTNull',
    'sample_mv_normal',
    'sample_mvt_vector_dof',
    'sample_mv_noncentral_t',
    'pvalue_from_stat',
    'stat_from_pvalue',
]
