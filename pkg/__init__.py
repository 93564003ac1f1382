"""
mtppower - Bayesian predictive power for multiple testing procedures

This package estimates the predictive marginal, average, disjunctive and
conjunctive powers of the Bonferroni, Holm, Benjamini-Yekutieli and
Dirichlet-process multiple testing procedures under arbitrary dependence
between p-values, and reproduces a 41-test lead-exposure case study.

Changes:
- Restructured to use a modules-based layout
- Version 0.1.0
"""

from modules.engine.power import PowerStudyConfig, run_power_analysis, shrinkage_sweep
from modules.engine.samplesize import sample_size_search
from modules.procedures.mtp import run_mtp
from modules.procedures.dpmtp import dp_prsig
from modules.cli.cli import run_cli

__version__ = '0.1.0'
__all__ = ['PowerStudyConfig', 'run_power_analysis', 'shrinkage_sweep', 'sample_size_search',
           'run_mtp', 'dp_prsig', 'run_cli']
