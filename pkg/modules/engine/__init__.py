"""
mtppower.engine - Predictive power analysis engine

This package runs the predictive power loop and exposes its report types,
diagnostics (p-value weights, significance chasing, Monte Carlo variance),
the shrinkage sweep and the sample-size search.

Changes:
- Initial implementation of the engine package
"""

from modules.engine.report import (
    MethodResult,
    PowerReport,
    ReportFile,
    report_file,
    mc_variance,
    pvalue_weights,
    hellinger,
    sig_chase,
    observed_family,
    observed_decisions,
)
from modules.engine.power import (
    DEFAULT_ALPHA,
    DEFAULT_S,
    DEFAULT_N,
    DEFAULT_SEED,
    DEFAULT_METHODS,
    DEFAULT_SWEEP,
    PowerStudyConfig,
    ShrinkageSweep,
    apply_shrinkage,
    run_power_analysis,
    shrinkage_sweep,
)
from modules.engine.samplesize import GrowthModel, SampleSizeResult, sample_size_search

__all__ = [
    'MethodResult',
    'PowerReport',
    'ReportFile',
    'report_file',
    'mc_variance',
    'pvalue_weights',
    'hellinger',
    'sig_chase',
    'observed_family',
    'observed_decisions',
    'DEFAULT_ALPHA',
    'DEFAULT_S',
    'DEFAULT_N',
    'DEFAULT_SEED',
    'DEFAULT_METHODS',
    'DEFAULT_SWEEP',
    'PowerStudyConfig',
    'ShrinkageSweep',
    'apply_shrinkage',
    'run_power_analysis',
    'shrinkage_sweep',
    'GrowthModel',
    'SampleSizeResult',
    'sample_size_search',
]
